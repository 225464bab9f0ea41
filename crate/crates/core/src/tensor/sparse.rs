use super::{Result, Tensor, TensorError};

/// Compressed sparse row matrix used as a constant left operand.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate coordinates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(TensorError::InvalidArgument {
                op: "sparse",
                reason: format!("entry ({r}, {c}) outside {rows}x{cols}"),
            });
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .iter()
            .position(|&c| c == col)
            .map_or(0.0, |p| self.values[span.start + p])
    }

    /// Nonzero entries of one row as `(col, value)`.
    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(&[self.rows, self.cols]);
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                t.set(r, c, v);
            }
        }
        t
    }

    /// `self * x` for a dense `[cols, n]` buffer.
    pub(crate) fn mul_dense(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * n];
        for r in 0..self.rows {
            let out_row = &mut out[r * n..(r + 1) * n];
            for (c, v) in self.row_entries(r) {
                for (o, xv) in out_row.iter_mut().zip(&x[c * n..(c + 1) * n]) {
                    *o += v * xv;
                }
            }
        }
        out
    }

    /// `self^T * g` for a dense `[rows, n]` buffer.
    pub(crate) fn mul_dense_transposed(&self, g: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols * n];
        for r in 0..self.rows {
            let g_row = &g[r * n..(r + 1) * n];
            for (c, v) in self.row_entries(r) {
                for (o, gv) in out[c * n..(c + 1) * n].iter_mut().zip(g_row) {
                    *o += v * gv;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m =
            SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn dense_products_agree() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)])
            .unwrap();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let dense = m.to_dense();
        assert_eq!(
            m.mul_dense(&x, 2),
            super::super::matmul_raw(dense.data(), &x, 2, 3, 2)
        );
        let g = [1.0, -1.0, 2.0, 0.5];
        let dt = super::super::transpose_raw(dense.data(), 2, 3);
        assert_eq!(
            m.mul_dense_transposed(&g, 2),
            super::super::matmul_raw(&dt, &g, 3, 2, 2)
        );
    }

    #[test]
    fn rejects_out_of_bounds() {
        assert!(SparseMatrix::from_triplets(1, 1, vec![(0, 1, 1.0)]).is_err());
    }
}
