//! Central finite differences, for checking tape gradients.
//!
//! Only forward evaluations are used here, never the tape's backward rules.

use super::Tensor;

/// `|ad - fd| / max(1, |fd|)`.
pub fn relative_error(ad: f64, fd: f64) -> f64 {
    (ad - fd).abs() / fd.abs().max(1.0)
}

/// Numerical gradient of a scalar function with respect to every entry of
/// every input, `(f(x + eps) - f(x - eps)) / 2 eps`.
pub fn central_difference<F>(mut f: F, inputs: &[Tensor], eps: f64) -> Vec<Tensor>
where
    F: FnMut(&[Tensor]) -> f64,
{
    let mut work = inputs.to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for i in 0..inputs.len() {
        let mut g = Tensor::zeros(inputs[i].shape());
        for j in 0..inputs[i].len() {
            let orig = work[i].data()[j];
            work[i].data_mut()[j] = orig + eps;
            let plus = f(&work);
            work[i].data_mut()[j] = orig - eps;
            let minus = f(&work);
            work[i].data_mut()[j] = orig;
            g.data_mut()[j] = (plus - minus) / (2.0 * eps);
        }
        out.push(g);
    }
    out
}

/// Largest [`relative_error`] between two gradient sets.
pub fn max_relative_error(ad: &[Tensor], fd: &[Tensor]) -> f64 {
    ad.iter()
        .zip(fd)
        .flat_map(|(a, f)| {
            a.data()
                .iter()
                .zip(f.data())
                .map(|(x, y)| relative_error(*x, *y))
        })
        .fold(0.0, f64::max)
}
