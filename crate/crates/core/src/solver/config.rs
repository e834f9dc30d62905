use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, DroError, Result};
use crate::linalg::weighted_covariance;
use crate::losses::{DualNorm, NormRegularizer};
use crate::robust_mean::{robust_mean_estimation_with_state, top_eigenvector};

/// How the solver obtains the hybrid gradient `(1/N) Σ β_i x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Spectral-filter estimate at contamination `2ε`.
    #[default]
    Robust,
    /// Plain average over every sample.
    Exact,
}

/// Source of the covariance scale used by the step-size schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// The supplied `sigma`.
    #[default]
    Given,
    /// Square root of the top eigenvalue of the filtered second-moment matrix.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdhgConfig {
    pub epsilon: f64,
    pub sigma: f64,
    pub zeta: f64,
    /// `C_Δ` in `Δ = C_Δ·σζ√ε`.
    pub delta_constant: f64,
    /// Upper bound `W₀` on `‖w₀ − w*‖₂`.
    pub w0_bound: f64,
    /// Fixed distance `D`, giving `γ = D/(ζ√N)` and disabling the search.
    pub gamma_dist: Option<f64>,
    pub s: DualNorm,
    pub rho: f64,
    pub max_t_cap: usize,
    pub oracle: OracleMode,
    pub sigma_mode: SigmaMode,
    /// Replaces `Δ` outright; needed when `ε = 0`.
    pub delta_override: Option<f64>,
    /// `C_eval` in the early-stopping slack.
    pub c_eval: f64,
    /// Initial iterate `w₀`; zero when absent.
    pub w_init: Option<Vec<f64>>,
}

impl Default for PdhgConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            sigma: 1.0,
            zeta: 1.0,
            delta_constant: 2.0,
            w0_bound: 10.0,
            gamma_dist: None,
            s: DualNorm::L2,
            rho: 0.0,
            max_t_cap: 100_000,
            oracle: OracleMode::Robust,
            sigma_mode: SigmaMode::Given,
            delta_override: None,
            c_eval: 2.0,
            w_init: None,
        }
    }
}

/// Step parameters for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub a: f64,
    pub c: f64,
    pub t: usize,
}

impl PdhgConfig {
    pub fn new(epsilon: f64, sigma: f64) -> Self {
        Self { epsilon, sigma, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.25).contains(&self.epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1/4), got {}", self.epsilon)));
        }
        for (name, v) in [("sigma", self.sigma), ("zeta", self.zeta), ("delta_constant", self.delta_constant)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.w0_bound > 0.0) {
            return Err(invalid(format!("w0_bound must be positive, got {}", self.w0_bound)));
        }
        if !(self.rho >= 0.0) {
            return Err(invalid(format!("rho must be >= 0, got {}", self.rho)));
        }
        if !(self.c_eval >= 0.0) {
            return Err(invalid(format!("c_eval must be >= 0, got {}", self.c_eval)));
        }
        if let Some(dist) = self.gamma_dist {
            if !(dist > 0.0 && dist.is_finite()) {
                return Err(invalid(format!("gamma_dist must be positive, got {dist}")));
            }
        }
        Ok(())
    }

    /// Accuracy target `Δ`.
    pub fn delta(&self) -> Result<f64> {
        let delta = self
            .delta_override
            .unwrap_or(self.delta_constant * self.sigma * self.zeta * self.epsilon.sqrt());
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be positive (got {delta}); set delta_override when epsilon = 0")));
        }
        Ok(delta)
    }

    /// `ψ(w) = ρζ‖w‖_s`.
    pub fn regularizer(&self) -> Result<NormRegularizer> {
        NormRegularizer::from_radius(self.s, self.rho, self.zeta)
    }

    /// Iteration count `T = ⌈2ζ·σ_proxy/Δ⌉`.
    pub fn iterations(&self, sigma_proxy: f64) -> Result<usize> {
        let ratio = 2.0 * self.zeta * sigma_proxy / self.delta()?;
        if !ratio.is_finite() || ratio > self.max_t_cap as f64 + 1.0 {
            return Err(DroError::IterationCap { t: ratio.ceil().min(usize::MAX as f64) as usize, cap: self.max_t_cap });
        }
        let t = ((ratio - 1e-9).ceil() as usize).max(1);
        if t > self.max_t_cap {
            return Err(DroError::IterationCap { t, cap: self.max_t_cap });
        }
        Ok(t)
    }

    pub fn initial_weight(&self, d: usize) -> Result<Array1<f64>> {
        match &self.w_init {
            None => Ok(Array1::zeros(d)),
            Some(w) if w.len() == d => Ok(Array1::from(w.clone())),
            Some(w) => Err(DroError::DimensionMismatch { expected: d, found: w.len() }),
        }
    }

    /// Covariance scale feeding `a_k` and `T`.
    pub fn sigma_proxy(&self, data: &Dataset) -> Result<f64> {
        match self.sigma_mode {
            SigmaMode::Given => Ok(self.sigma),
            SigmaMode::Estimated => estimate_sigma(data.covariates.view(), self.epsilon),
        }
    }
}

fn estimate_sigma(x: ArrayView2<f64>, epsilon: f64) -> Result<f64> {
    let (n, k) = x.dim();
    if n == 0 || k == 0 {
        return Err(invalid("cannot estimate sigma from an empty design"));
    }
    let weights = if epsilon > 0.0 && n >= 2 {
        robust_mean_estimation_with_state(x, 2.0 * epsilon)?.state.weights
    } else {
        vec![1.0 / n as f64; n]
    };
    let total: f64 = weights.iter().sum();
    let second_moment = weighted_covariance(x, &weights, Array1::zeros(k).view(), total);
    let (_, lambda) = top_eigenvector(second_moment.view())?;
    let sigma = lambda.sqrt();
    if !(sigma > 0.0) {
        return Err(invalid("estimated sigma is zero"));
    }
    Ok(sigma)
}

/// `a_k = √N/σ_proxy` for `k ≥ 1` (`a_0 = 0`), `c_k = 2 − k/T`.
pub fn schedule(cfg: &PdhgConfig, sigma_proxy: f64, n: usize, k: usize) -> Result<Schedule> {
    let t = cfg.iterations(sigma_proxy)?;
    Ok(schedule_at(sigma_proxy, n, k, t))
}

pub(crate) fn schedule_at(sigma_proxy: f64, n: usize, k: usize, t: usize) -> Schedule {
    let a = if k == 0 { 0.0 } else { (n as f64).sqrt() / sigma_proxy };
    let c = if k == t { 1.0 } else { 2.0 - k as f64 / t as f64 };
    Schedule { a, c, t }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plug_in_iteration_count() {
        let cfg = PdhgConfig::new(0.04, 1.0);
        assert!((cfg.delta().unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(cfg.iterations(1.0).unwrap(), 5);
    }

    #[test]
    fn endpoints_of_schedule() {
        let cfg = PdhgConfig::new(0.04, 1.0);
        let last = schedule(&cfg, 1.0, 100, 5).unwrap();
        assert_eq!(last.c, 1.0);
        let s = schedule(&cfg, 2.0, 100, 3).unwrap();
        assert_eq!(s.a, 5.0);
        assert_eq!(schedule_at(1.0, 100, 0, 5).c, 2.0);
        assert_eq!(schedule_at(1.0, 100, 0, 5).a, 0.0);
    }

    #[test]
    fn c_strictly_decreasing() {
        let t = 17;
        let cs: Vec<f64> = (0..=t).map(|k| schedule_at(1.0, 10, k, t).c).collect();
        assert!(cs.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(cs[t], 1.0);
    }

    #[test]
    fn zero_epsilon_needs_override() {
        let mut cfg = PdhgConfig::new(0.0, 1.0);
        assert!(cfg.delta().is_err());
        cfg.delta_override = Some(0.01);
        assert_eq!(cfg.iterations(1.0).unwrap(), 200);
    }

    #[test]
    fn cap_enforced() {
        let mut cfg = PdhgConfig::new(0.0, 1.0);
        cfg.delta_override = Some(1e-6);
        cfg.max_t_cap = 1000;
        assert!(matches!(cfg.iterations(1.0), Err(DroError::IterationCap { .. })));
    }

    #[test]
    fn json_defaults() {
        let cfg: PdhgConfig = serde_json::from_str(r#"{"epsilon": 0.05, "s": "inf"}"#).unwrap();
        assert_eq!(cfg.s, DualNorm::Inf);
        assert_eq!(cfg.delta_constant, 2.0);
    }
}
