use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::filter::robust_mean_estimation;
use crate::error::{invalid, DroError, Result};
use crate::linalg::mean_rows;

/// Robust estimate of `(1/N) Σ β_i x_i` from an `ε`-corrupted sample.
///
/// Every `|β_i|` must be at most `3ζ`. The estimate is the spectral-filter
/// mean of the rescaled covariates `{β_i x_i}` at contamination `2ε`; with
/// `ε = 0` it is the exact average.
pub fn inexact_hybrid_gradient_oracle(
    beta: ArrayView1<f64>,
    covariates: ArrayView2<f64>,
    epsilon: f64,
    zeta: f64,
) -> Result<Array1<f64>> {
    let scaled = scaled_covariates(beta, covariates, zeta)?;
    if !(0.0..0.25).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0, 1/4), got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(mean_rows(scaled.view()));
    }
    robust_mean_estimation(scaled.view(), 2.0 * epsilon)
}

/// Exact average `(1/N) Σ β_i x_i` under the same contract.
pub fn exact_hybrid_gradient(beta: ArrayView1<f64>, covariates: ArrayView2<f64>, zeta: f64) -> Result<Array1<f64>> {
    Ok(mean_rows(scaled_covariates(beta, covariates, zeta)?.view()))
}

fn scaled_covariates(beta: ArrayView1<f64>, covariates: ArrayView2<f64>, zeta: f64) -> Result<Array2<f64>> {
    let n = covariates.nrows();
    if beta.len() != n {
        return Err(DroError::DimensionMismatch { expected: n, found: beta.len() });
    }
    let bound = 3.0 * zeta;
    if let Some((index, &value)) = beta.iter().enumerate().find(|(_, b)| !(b.abs() <= bound + 1e-9)) {
        return Err(DroError::OracleContract { index, value, bound });
    }
    let mut scaled = covariates.to_owned();
    for (mut row, &b) in scaled.rows_mut().into_iter().zip(beta.iter()) {
        row *= b;
    }
    Ok(scaled)
}
