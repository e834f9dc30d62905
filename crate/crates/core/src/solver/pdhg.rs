use ndarray::{Array1, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use super::config::{schedule_at, OracleMode, PdhgConfig};
use super::tune::robust_objective_estimate;
use crate::data::Dataset;
use crate::error::{DroError, Result};
use crate::losses::{conjugate_prox_kappa, reg_prox, LossFamily, NormRegularizer};
use crate::robust_mean::{exact_hybrid_gradient, inexact_hybrid_gradient_oracle};

/// Source of hybrid-gradient estimates `≈ (1/N) Σ β_i x_i`.
pub trait GradientOracle {
    fn estimate(&mut self, beta: ArrayView1<f64>, covariates: ArrayView2<f64>) -> Result<Array1<f64>>;
}

/// Spectral-filter oracle for `ε`-corrupted data.
#[derive(Debug, Clone, Copy)]
pub struct FilterOracle {
    pub epsilon: f64,
    pub zeta: f64,
}

impl GradientOracle for FilterOracle {
    fn estimate(&mut self, beta: ArrayView1<f64>, covariates: ArrayView2<f64>) -> Result<Array1<f64>> {
        inexact_hybrid_gradient_oracle(beta, covariates, self.epsilon, self.zeta)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOracle {
    pub zeta: f64,
}

impl GradientOracle for ExactOracle {
    fn estimate(&mut self, beta: ArrayView1<f64>, covariates: ArrayView2<f64>) -> Result<Array1<f64>> {
        exact_hybrid_gradient(beta, covariates, self.zeta)
    }
}

impl<O: GradientOracle + ?Sized> GradientOracle for &mut O {
    fn estimate(&mut self, beta: ArrayView1<f64>, covariates: ArrayView2<f64>) -> Result<Array1<f64>> {
        (**self).estimate(beta, covariates)
    }
}

/// Snapshot handed to observers after iteration `k`.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub k: usize,
    pub a: f64,
    pub c: f64,
    /// Primal step `a_k·γ/c_k`.
    pub step: f64,
    pub beta_bar: ArrayView1<'a, f64>,
    pub z_bar: ArrayView1<'a, f64>,
    pub w: ArrayView1<'a, f64>,
    pub alpha: ArrayView1<'a, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub w_hat: Vec<f64>,
    /// Robust objective estimate of the running average after each iteration.
    pub objective_trace: Vec<f64>,
    pub oracle_calls: usize,
    pub gamma_used: f64,
    pub t_used: usize,
    pub max_abs_alpha: f64,
    pub max_abs_beta: f64,
    /// Number of full solves behind this result.
    pub solver_runs: usize,
}

impl SolveResult {
    pub fn w(&self) -> Array1<f64> {
        Array1::from(self.w_hat.clone())
    }
}

pub(crate) fn make_oracle(cfg: &PdhgConfig) -> Box<dyn GradientOracle> {
    match cfg.oracle {
        OracleMode::Robust if cfg.epsilon > 0.0 => Box::new(FilterOracle { epsilon: cfg.epsilon, zeta: cfg.zeta }),
        _ => Box::new(ExactOracle { zeta: cfg.zeta }),
    }
}

/// `w_k = prox_{τψ}(w_{k−1} − τ z̄_k)`.
pub fn primal_step(w_prev: ArrayView1<f64>, z_bar: ArrayView1<f64>, step: f64, reg: &NormRegularizer) -> Array1<f64> {
    let mut v = w_prev.to_owned();
    v.scaled_add(-step, &z_bar);
    reg_prox(reg, v.view(), step)
}

/// Primal-dual hybrid gradient with an inexact primal gradient and a
/// diminishing primal regularization `c_k`.
///
/// `data` must already carry the intercept column. The distance `D` behind
/// `γ = D/(ζ√N)` is `cfg.gamma_dist`, falling back to `cfg.w0_bound`.
pub fn pdhg_solve(data: &Dataset, loss: &LossFamily, reg: &NormRegularizer, cfg: &PdhgConfig) -> Result<SolveResult> {
    let mut oracle = make_oracle(cfg);
    pdhg_solve_with(data, loss, reg, cfg, oracle.as_mut(), |_| {})
}

pub fn pdhg_solve_with<F>(
    data: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    cfg: &PdhgConfig,
    oracle: &mut dyn GradientOracle,
    mut observe: F,
) -> Result<SolveResult>
where
    F: FnMut(&IterationView),
{
    cfg.validate()?;
    let (n, d) = data.covariates.dim();
    if n == 0 {
        return Err(crate::error::invalid("cannot solve on an empty dataset"));
    }
    for &y in data.labels.iter() {
        loss.check_label(y)?;
    }
    let x = data.covariates.view();
    let sigma_proxy = cfg.sigma_proxy(data)?;
    let t = cfg.iterations(sigma_proxy)?;
    let dist = cfg.gamma_dist.unwrap_or(cfg.w0_bound);
    let gamma = dist / (loss.zeta * (n as f64).sqrt());
    // a_k·γ = D/(ζσ) for k ≥ 1.
    let a_gamma = dist / (loss.zeta * sigma_proxy);

    let mut w = cfg.initial_weight(d)?;
    let mut alpha = Array1::from_elem(n, 1.0 / n as f64);
    let mut alpha_prev = alpha.clone();
    let mut beta = Array1::zeros(n);
    let mut scores = Array1::zeros(n);
    let mut w_sum = Array1::<f64>::zeros(d);
    let mut a_total = 0.0;
    let mut a_prev = 0.0;
    let mut trace = Vec::with_capacity(t);
    let (mut max_alpha, mut max_beta) = (0.0_f64, 0.0_f64);

    for k in 1..=t {
        let sch = schedule_at(sigma_proxy, n, k, t);
        let ratio = a_prev / sch.a;
        Zip::from(&mut beta).and(&alpha).and(&alpha_prev).for_each(|b, &al, &ap| *b = al + ratio * (al - ap));
        max_beta = beta.iter().fold(max_beta, |m, b| m.max(b.abs()));

        let z_bar = oracle.estimate(beta.view(), x)?;
        if z_bar.len() != d {
            return Err(DroError::DimensionMismatch { expected: d, found: z_bar.len() });
        }
        let step = a_gamma / sch.c;
        w = primal_step(w.view(), z_bar.view(), step, reg);

        let kappa = sch.a / (n as f64 * gamma);
        ndarray::linalg::general_mat_vec_mul(1.0, &x, &w, 0.0, &mut scores);
        std::mem::swap(&mut alpha, &mut alpha_prev);
        for i in 0..n {
            alpha[i] = conjugate_prox_kappa(loss, data.labels[i], scores[i], alpha_prev[i], kappa)?;
        }
        max_alpha = alpha.iter().fold(max_alpha, |m, v| m.max(v.abs()));

        w_sum.scaled_add(sch.a, &w);
        a_total += sch.a;
        a_prev = sch.a;

        observe(&IterationView {
            k,
            a: sch.a,
            c: sch.c,
            step,
            beta_bar: beta.view(),
            z_bar: z_bar.view(),
            w: w.view(),
            alpha: alpha.view(),
        });
        let average = &w_sum / a_total;
        trace.push(robust_objective_estimate(average.view(), data, loss, reg, cfg.epsilon)?);
    }

    Ok(SolveResult {
        w_hat: (w_sum / a_total).to_vec(),
        objective_trace: trace,
        oracle_calls: t,
        gamma_used: gamma,
        t_used: t,
        max_abs_alpha: max_alpha,
        max_abs_beta: max_beta,
        solver_runs: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{DualNorm, LossKind};
    use ndarray::array;

    fn toy() -> Dataset {
        let x = array![[1.0, 1.0], [1.0, -1.0], [1.0, 2.0], [1.0, -2.0], [1.0, 0.5], [1.0, -0.5]];
        let y = array![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        Dataset::new(x, y, 1.0).unwrap()
    }

    fn exact_cfg(delta: f64) -> PdhgConfig {
        PdhgConfig {
            epsilon: 0.0,
            delta_override: Some(delta),
            oracle: OracleMode::Exact,
            gamma_dist: Some(2.0),
            sigma: 1.5,
            ..PdhgConfig::default()
        }
    }

    #[test]
    fn trace_length_and_feasibility() {
        let data = toy();
        let loss = LossFamily::new(LossKind::Hinge);
        let reg = NormRegularizer::new(DualNorm::L2, 0.1).unwrap();
        let cfg = exact_cfg(0.05);
        let mut worst = 0.0_f64;
        let res = pdhg_solve_with(&data, &loss, &reg, &cfg, &mut ExactOracle { zeta: 1.0 }, |it| {
            worst = worst.max(it.alpha.iter().fold(0.0, |m: f64, a| m.max(a.abs())));
        })
        .unwrap();
        assert_eq!(res.objective_trace.len(), res.t_used);
        assert_eq!(res.t_used, 60);
        assert_eq!(res.oracle_calls, 60);
        assert!(worst <= 1.0 + 1e-9);
        assert!(res.max_abs_beta <= 3.0 + 1e-9);
    }

    #[test]
    fn separable_toy_reaches_small_objective() {
        let data = toy();
        let loss = LossFamily::new(LossKind::Hinge);
        let res = pdhg_solve(&data, &loss, &NormRegularizer::none(), &exact_cfg(0.01)).unwrap();
        let last = *res.objective_trace.last().unwrap();
        assert!(last < 0.1, "{last}");
        assert!(res.w_hat[1] > 0.0);
    }

    #[test]
    fn rejects_bad_labels() {
        let mut data = toy();
        data.labels[0] = 0.5;
        let loss = LossFamily::new(LossKind::Logistic);
        assert!(pdhg_solve(&data, &loss, &NormRegularizer::none(), &exact_cfg(0.1)).is_err());
    }

    #[test]
    fn primal_step_without_regularizer_is_gradient_step() {
        let w = primal_step(array![1.0, 2.0].view(), array![0.5, -1.0].view(), 2.0, &NormRegularizer::none());
        assert_eq!(w, array![0.0, 4.0]);
    }
}
