//! Little-endian tensor layout:
//!
//! ```text
//! u32  rank
//! u64  dim[0] .. dim[rank-1]
//! f64  values, row-major
//! ```

use std::io::{Read, Write};

use super::{Result, Tensor, TensorError};

fn io_err(e: std::io::Error) -> TensorError {
    TensorError::Io(e.to_string())
}

pub fn write_tensor<W: Write>(out: &mut W, tensor: &Tensor) -> Result<()> {
    out.write_all(&(tensor.rank() as u32).to_le_bytes())
        .map_err(io_err)?;
    for &d in tensor.shape() {
        out.write_all(&(d as u64).to_le_bytes()).map_err(io_err)?;
    }
    for v in tensor.data() {
        out.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(input: &mut R) -> Result<Tensor> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4).map_err(io_err)?;
    let rank = u32::from_le_bytes(b4) as usize;
    if rank > 8 {
        return Err(TensorError::Io(format!("implausible rank {rank}")));
    }
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        input.read_exact(&mut b8).map_err(io_err)?;
        shape.push(u64::from_le_bytes(b8) as usize);
    }
    let numel: usize = shape.iter().product();
    let mut data = Vec::with_capacity(numel);
    for _ in 0..numel {
        input.read_exact(&mut b8).map_err(io_err)?;
        data.push(f64::from_le_bytes(b8));
    }
    Tensor::new(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_documented_bytes() {
        let t = Tensor::vector(vec![1.5]);
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        let mut expected = 1u32.to_le_bytes().to_vec();
        expected.extend(1u64.to_le_bytes());
        expected.extend(1.5f64.to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn truncated_input_fails() {
        let mut buf = Vec::new();
        write_tensor(&mut buf, &Tensor::zeros(&[2, 2])).unwrap();
        buf.pop();
        assert!(read_tensor(&mut buf.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bitwise(rows in 0usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let data: Vec<f64> = (0..rows * cols)
                .map(|i| f64::from_bits(seed.wrapping_mul(i as u64 + 1) >> 2))
                .collect();
            let t = Tensor::matrix(rows, cols, data).unwrap();
            let mut buf = Vec::new();
            write_tensor(&mut buf, &t).unwrap();
            let back = read_tensor(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back.shape(), t.shape());
            let same = back.data().iter().zip(t.data()).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
    }
}
