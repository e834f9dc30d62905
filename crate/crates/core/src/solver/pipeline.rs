use ndarray::{s, Array1, ArrayView1};

use super::config::PdhgConfig;
use super::pdhg::{pdhg_solve, SolveResult};
use super::tune::tune_gamma;
use crate::data::Dataset;
use crate::error::Result;
use crate::linalg::{mean_rows, norm2};
use crate::losses::{LossFamily, NormRegularizer};
use crate::robust_mean::robust_mean_estimation;

/// End-to-end solve for covariates with an unknown mean.
///
/// Covariates are centered at a robust mean estimate (contamination `2ε`),
/// an intercept column is prepended, the step size is searched unless
/// `cfg.gamma_dist` fixes it, and the solution is mapped back so that
/// `w_hat = (w⁰, w̃)` acts on `(1, x)` in the original coordinates.
pub fn pipeline(raw: &Dataset, loss: &LossFamily, reg: &NormRegularizer, cfg: &PdhgConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let x = raw.covariates.view();
    let mu_hat = if cfg.epsilon > 0.0 && x.ncols() > 0 {
        robust_mean_estimation(x, 2.0 * cfg.epsilon)?
    } else {
        mean_rows(x)
    };
    let design = raw.center_with_estimate(mu_hat.view())?.prepend_ones();
    let mut res = match cfg.gamma_dist {
        Some(_) => pdhg_solve(&design, loss, reg, cfg)?,
        None => tune_gamma(&design, loss, reg, cfg)?,
    };
    res.w_hat = uncenter(Array1::from(std::mem::take(&mut res.w_hat)).view(), mu_hat.view()).to_vec();
    Ok(res)
}

/// Maps `(w⁰, w̃)` fitted on centered covariates back to the original ones:
/// the intercept becomes `w⁰ − w̃·μ̂`.
pub fn uncenter(w: ArrayView1<f64>, mu_hat: ArrayView1<f64>) -> Array1<f64> {
    let mut out = w.to_owned();
    out[0] -= w.slice(s![1..]).dot(&mu_hat);
    out
}

/// Projection onto the Euclidean ball of radius `1/(λσ)`.
pub fn clip_weight(w: ArrayView1<f64>, lambda: f64, sigma: f64) -> Array1<f64> {
    let norm = norm2(w);
    let radius = 1.0 / (lambda * sigma);
    if norm <= radius {
        w.to_owned()
    } else {
        w.mapv(|v| v * radius / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn clipping() {
        assert_eq!(clip_weight(array![3.0, 4.0].view(), 1.0, 1.0), array![0.6, 0.8]);
        assert_eq!(clip_weight(array![0.1, 0.1].view(), 1.0, 1.0), array![0.1, 0.1]);
        assert_eq!(clip_weight(array![0.0, 0.0].view(), 2.0, 3.0), array![0.0, 0.0]);
    }

    #[test]
    fn uncentered_predictions_match() {
        let w = array![0.5, 2.0, -1.0];
        let mu = array![1.0, 3.0];
        let x = array![4.0, -2.0];
        let centered = 0.5 + 2.0 * (4.0 - 1.0) + -1.0 * (-2.0 - 3.0);
        let back = uncenter(w.view(), mu.view());
        let original = back[0] + back[1] * x[0] + back[2] * x[1];
        assert!((centered - original).abs() < 1e-12);
    }
}
