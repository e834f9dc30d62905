use ndarray::{Array1, Zip};

use super::config::{schedule_at, PdhgConfig};
use super::pdhg::primal_step;
use crate::data::Dataset;
use crate::error::{invalid, DroError, Result};
use crate::linalg::norm2;
use crate::losses::{conjugate_prox_kappa, LossFamily, NormRegularizer};

/// Iterates of the idealized loop run on the stable samples.
#[derive(Debug, Clone)]
pub struct IdealizedRun {
    pub w_iterates: Vec<Array1<f64>>,
    pub w_hat: Array1<f64>,
    /// `‖z_k − (1/N) Σ β_{k−1,i} x_i‖₂` against the stable covariates.
    pub gradient_errors: Vec<f64>,
}

/// Runs the primal-dual loop on `stable` with the primal gradients taken
/// verbatim from `injected` instead of an oracle.
///
/// Schedules and `γ` follow `cfg` exactly as in [`super::pdhg_solve`], so
/// feeding the `z̄_k` recorded from a corrupted run reproduces its primal
/// iterates.
pub fn idealized_pdhg(
    stable: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    cfg: &PdhgConfig,
    injected: &[Array1<f64>],
) -> Result<IdealizedRun> {
    cfg.validate()?;
    let (n, d) = stable.covariates.dim();
    if n == 0 {
        return Err(invalid("cannot run on an empty dataset"));
    }
    let sigma_proxy = cfg.sigma_proxy(stable)?;
    let t = cfg.iterations(sigma_proxy)?;
    if injected.len() != t {
        return Err(DroError::DimensionMismatch { expected: t, found: injected.len() });
    }
    let x = stable.covariates.view();
    let dist = cfg.gamma_dist.unwrap_or(cfg.w0_bound);
    let gamma = dist / (loss.zeta * (n as f64).sqrt());
    // a_k·γ = D/(ζσ) for k ≥ 1.
    let a_gamma = dist / (loss.zeta * sigma_proxy);

    let mut w = cfg.initial_weight(d)?;
    let mut alpha = Array1::from_elem(n, 1.0 / n as f64);
    let mut alpha_prev = alpha.clone();
    let mut beta = Array1::zeros(n);
    let mut w_sum = Array1::<f64>::zeros(d);
    let mut a_total = 0.0;
    let mut a_prev = 0.0;
    let mut w_iterates = Vec::with_capacity(t);
    let mut gradient_errors = Vec::with_capacity(t);

    for (k, z) in (1..=t).zip(injected) {
        let sch = schedule_at(sigma_proxy, n, k, t);
        let ratio = a_prev / sch.a;
        Zip::from(&mut beta).and(&alpha).and(&alpha_prev).for_each(|b, &al, &ap| *b = al + ratio * (al - ap));
        let exact = x.t().dot(&beta) / n as f64;
        gradient_errors.push(norm2((z - &exact).view()));

        let step = a_gamma / sch.c;
        w = primal_step(w.view(), z.view(), step, reg);

        let kappa = sch.a / (n as f64 * gamma);
        let scores = x.dot(&w);
        std::mem::swap(&mut alpha, &mut alpha_prev);
        for i in 0..n {
            alpha[i] = conjugate_prox_kappa(loss, stable.labels[i], scores[i], alpha_prev[i], kappa)?;
        }
        w_sum.scaled_add(sch.a, &w);
        a_total += sch.a;
        a_prev = sch.a;
        w_iterates.push(w.clone());
    }

    Ok(IdealizedRun { w_iterates, w_hat: w_sum / a_total, gradient_errors })
}
