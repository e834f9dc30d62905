use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::config::PdhgConfig;
use super::pdhg::{pdhg_solve, SolveResult};
use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::losses::{LossFamily, NormRegularizer};
use crate::robust_mean::trimmed_mean_1d;

/// Robust estimate of `(1/N) Σ ℓ_{y_i}(x_i·w) + ψ(w)` from corrupted data:
/// per-sample losses are averaged after two-sided trimming at `ε`
/// (plain average when `ε = 0`).
pub fn robust_objective_estimate(
    w: ArrayView1<f64>,
    data: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    epsilon: f64,
) -> Result<f64> {
    let scores = data.covariates.dot(&w);
    let losses = scores
        .iter()
        .zip(data.labels.iter())
        .map(|(&z, &y)| loss.eval(y, z))
        .collect::<Result<Vec<f64>>>()?;
    let center = if epsilon > 0.0 {
        trimmed_mean_1d(&losses, epsilon)?
    } else {
        losses.iter().sum::<f64>() / losses.len().max(1) as f64
    };
    Ok(center + reg.eval(w))
}

/// One candidate of the step-size search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneCandidate {
    pub distance: f64,
    pub objective_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: SolveResult,
    pub best_distance: f64,
    pub candidates: Vec<TuneCandidate>,
    pub early_stopped: bool,
}

/// Candidate distances `D_j = (Δ/ζ)·2^j` for `j = 0..=⌈log₂(W₀ζ/Δ)⌉`.
pub fn candidate_distances(cfg: &PdhgConfig) -> Result<Vec<f64>> {
    let delta = cfg.delta()?;
    let base = delta / cfg.zeta;
    let span = cfg.w0_bound / base;
    let j_max = if span <= 1.0 { 0 } else { (span.log2() - 1e-9).ceil().max(0.0) as u32 };
    Ok((0..=j_max).map(|j| base * 2f64.powi(j as i32)).collect())
}

/// Geometric search over the distance `D` in `γ = D/(ζ√N)`.
///
/// Each candidate is solved in full and scored by
/// [`robust_objective_estimate`]. The search stops once a candidate scores
/// above the best so far by more than `3·E_ub`, with
/// `E_ub = C_eval·ζ(‖w₀‖₂ + W₀)σ√ε`. Ties go to the smaller distance. The
/// returned `oracle_calls` and `solver_runs` count every candidate run.
pub fn tune_gamma(data: &Dataset, loss: &LossFamily, reg: &NormRegularizer, cfg: &PdhgConfig) -> Result<SolveResult> {
    Ok(tune_gamma_traced(data, loss, reg, cfg)?.best)
}

pub fn tune_gamma_traced(
    data: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    cfg: &PdhgConfig,
) -> Result<TuneOutcome> {
    cfg.validate()?;
    let w0 = cfg.initial_weight(data.dim())?;
    let e_ub = cfg.c_eval * cfg.zeta * (w0.dot(&w0).sqrt() + cfg.w0_bound) * cfg.sigma * cfg.epsilon.sqrt();

    let mut best: Option<(SolveResult, f64, f64)> = None;
    let mut candidates = Vec::new();
    let mut early_stopped = false;
    let (mut calls, mut runs) = (0, 0);
    for dist in candidate_distances(cfg)? {
        let run_cfg = PdhgConfig { gamma_dist: Some(dist), ..cfg.clone() };
        let res = pdhg_solve(data, loss, reg, &run_cfg)?;
        calls += res.oracle_calls;
        runs += 1;
        let f = robust_objective_estimate(res.w().view(), data, loss, reg, cfg.epsilon)?;
        if !f.is_finite() {
            return Err(invalid(format!("objective estimate is not finite at distance {dist}")));
        }
        candidates.push(TuneCandidate { distance: dist, objective_estimate: f });
        match &best {
            Some((_, _, f_best)) if f > f_best + 3.0 * e_ub => {
                early_stopped = true;
                break;
            }
            Some((_, _, f_best)) if f >= *f_best => {}
            _ => best = Some((res, dist, f)),
        }
    }
    let (mut res, best_distance, _) = best.ok_or_else(|| invalid("no tuning candidates"))?;
    res.oracle_calls = calls;
    res.solver_runs = runs;
    Ok(TuneOutcome { best: res, best_distance, candidates, early_stopped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::OracleMode;

    #[test]
    fn candidate_grid() {
        let cfg = PdhgConfig { epsilon: 0.0, delta_override: Some(0.5), w0_bound: 4.0, ..PdhgConfig::default() };
        assert_eq!(candidate_distances(&cfg).unwrap(), vec![0.5, 1.0, 2.0, 4.0]);
        let cfg = PdhgConfig { w0_bound: 5.0, ..cfg };
        assert_eq!(candidate_distances(&cfg).unwrap().len(), 5);
        let cfg = PdhgConfig { w0_bound: 0.1, ..cfg };
        assert_eq!(candidate_distances(&cfg).unwrap(), vec![0.5]);
    }

    #[test]
    fn tuned_equals_direct_with_single_candidate() {
        let x = ndarray::array![[1.0, 1.0], [1.0, -1.0], [1.0, 2.0], [1.0, -2.0]];
        let data = Dataset::new(x, ndarray::array![1.0, -1.0, 1.0, -1.0], 1.0).unwrap();
        let loss = LossFamily::new(crate::LossKind::Hinge);
        let cfg = PdhgConfig {
            epsilon: 0.0,
            delta_override: Some(0.1),
            w0_bound: 0.1,
            oracle: OracleMode::Exact,
            ..PdhgConfig::default()
        };
        let tuned = tune_gamma(&data, &loss, &NormRegularizer::none(), &cfg).unwrap();
        let direct = pdhg_solve(&data, &loss, &NormRegularizer::none(), &PdhgConfig { gamma_dist: Some(0.1), ..cfg }).unwrap();
        assert_eq!(tuned, direct);
    }
}
