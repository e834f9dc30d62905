use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::spectral::top_eigenvector;
use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::linalg::{covariance_about, mean_rows, norm2};

/// Default slack on the covariance bound.
pub const C_STAB: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `‖mean(S) − μ‖₂`
    pub mean_deviation: f64,
    /// `‖Cov(S) − σ²I‖_op`
    pub cov_opnorm: f64,
    pub is_stable: bool,
}

/// Checks `(ε, δ)`-stability of a point set with `δ = ε`: the sample mean is
/// within `ε` of `mu` and the sample covariance within `C_STAB·σ²·ε` of `σ²I`
/// in operator norm.
pub fn stability_check(
    points: ArrayView2<f64>,
    mu: ArrayView1<f64>,
    sigma2: f64,
    epsilon: f64,
) -> Result<StabilityReport> {
    stability_check_with(points, mu, sigma2, epsilon, C_STAB)
}

pub fn stability_check_with(
    points: ArrayView2<f64>,
    mu: ArrayView1<f64>,
    sigma2: f64,
    epsilon: f64,
    c_stab: f64,
) -> Result<StabilityReport> {
    let (n, k) = points.dim();
    if n == 0 {
        return Err(invalid("stability check needs at least one point"));
    }
    if mu.len() != k {
        return Err(crate::DroError::DimensionMismatch { expected: k, found: mu.len() });
    }
    if !(sigma2 > 0.0) || !(epsilon > 0.0) {
        return Err(invalid("sigma2 and epsilon must be positive"));
    }
    let mean = mean_rows(points);
    let mean_deviation = norm2((&mean - &mu).view());
    let cov = covariance_about(points, mean.view());
    let shifted = &cov - &(ndarray::Array2::<f64>::eye(k) * sigma2);
    // ‖A‖_op = max(λ_max(A), −λ_min(A)); both ends via PSD shifts
    let bound = shifted.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    let eye = ndarray::Array2::<f64>::eye(k);
    let (_, top) = top_eigenvector((&shifted + &(&eye * bound)).view())?;
    let (_, bottom) = top_eigenvector((&(&eye * bound) - &shifted).view())?;
    let cov_opnorm = (top - bound).abs().max((bottom - bound).abs());
    let is_stable = mean_deviation <= epsilon && cov_opnorm <= c_stab * sigma2 * epsilon;
    Ok(StabilityReport { mean_deviation, cov_opnorm, is_stable })
}

/// Indices of points within `2σ√(k/ε)` of the sample mean, in ascending order.
pub fn stability_filter(data: &Dataset, epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let x = data.covariates.view();
    let k = x.ncols();
    let radius = 2.0 * data.sigma * (k as f64 / epsilon).sqrt();
    let mean = mean_rows(x);
    Ok(x
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(_, row)| norm2((row - &mean).view()) <= radius)
        .map(|(i, _)| i)
        .collect())
}
