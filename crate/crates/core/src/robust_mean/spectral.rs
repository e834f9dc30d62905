use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    /// Stop once `‖Sv − λv‖₂ ≤ tol·λ`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 10_000 }
    }
}

/// Top eigenpair of a symmetric PSD matrix by power iteration from a fixed
/// start vector. The zero matrix yields `(e₁, 0)`.
pub fn top_eigenvector(s: ArrayView2<f64>) -> Result<(Array1<f64>, f64)> {
    power_iteration(s, None, PowerOptions::default())
}

pub fn power_iteration(
    s: ArrayView2<f64>,
    start: Option<ArrayView1<f64>>,
    opts: PowerOptions,
) -> Result<(Array1<f64>, f64)> {
    let k = s.nrows();
    if s.ncols() != k {
        return Err(invalid(format!("matrix must be square, got {}x{}", k, s.ncols())));
    }
    if k == 0 {
        return Err(invalid("empty matrix has no eigenvector"));
    }
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (s[[i, j]], s[[j, i]]);
            if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let e1 = || {
        let mut e = Array1::zeros(k);
        e[0] = 1.0;
        e
    };
    let mut v = match start {
        Some(v0) if v0.len() == k && v0.dot(&v0) > 0.0 => v0.to_owned(),
        // fixed, generic start: unlikely to be orthogonal to the top eigenspace
        _ => Array1::from_iter((0..k).map(|j| 1.0 + (j as f64 + 1.0).sqrt() / (k as f64 + 1.0))),
    };
    let norm = v.dot(&v).sqrt();
    v /= norm;

    let mut lambda = 0.0;
    for _ in 0..opts.max_iter.max(1) {
        let sv = s.dot(&v);
        lambda = v.dot(&sv);
        let nrm = sv.dot(&sv).sqrt();
        if nrm == 0.0 {
            return Ok((e1(), 0.0));
        }
        let resid = &sv - &(&v * lambda);
        if resid.dot(&resid).sqrt() <= opts.tol * lambda.abs() {
            return Ok((v, lambda.max(0.0)));
        }
        v = sv / nrm;
    }
    Ok((v, lambda.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn identity_has_unit_eigenvalue() {
        let (v, l) = top_eigenvector(Array2::<f64>::eye(4).view()).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        assert!((v.dot(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal() {
        let (v, l) = top_eigenvector(array![[3.0, 0.0], [0.0, 1.0]].view()).unwrap();
        assert!((l - 3.0).abs() < 1e-8);
        assert!((v[0].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_matrix() {
        let (v, l) = top_eigenvector(Array2::<f64>::zeros((3, 3)).view()).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(v, array![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(top_eigenvector(array![[1.0, 2.0], [0.0, 1.0]].view()).is_err());
        assert!(top_eigenvector(Array2::<f64>::zeros((2, 3)).view()).is_err());
    }
}
