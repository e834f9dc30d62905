use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{ErmOptions, ReferenceOptions};
use crate::data::{Adversary, CovariateLaw, LabelModel, SyntheticSpec};
use crate::error::{invalid, DroError, Result};
use crate::losses::LossKind;
use crate::solver::PdhgConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pdhg,
    Erm,
    Doro,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pdhg => "pdhg",
            Method::Erm => "erm",
            Method::Doro => "doro",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = DroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdhg" => Ok(Method::Pdhg),
            "erm" => Ok(Method::Erm),
            "doro" => Ok(Method::Doro),
            _ => Err(invalid(format!("unknown method {s:?}"))),
        }
    }
}

/// Synthetic data shared by every row; `d` counts the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub d: usize,
    pub n: usize,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "gaussian")]
    pub law: CovariateLaw,
    /// Explicit planted parameter (intercept first). Defaults to `signal·e₁`.
    #[serde(default)]
    pub planted_w: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub signal: f64,
    pub labels: LabelModel,
    pub seeds: Vec<u64>,
}

fn one() -> f64 {
    1.0
}

fn gaussian() -> CovariateLaw {
    CovariateLaw::Gaussian
}

impl DataConfig {
    pub fn planted(&self) -> Vec<f64> {
        self.planted_w.clone().unwrap_or_else(|| {
            let mut w = vec![0.0; self.d];
            if self.d > 1 {
                w[1] = self.signal;
            }
            w
        })
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec { d: self.d, n: self.n, planted_w: self.planted(), sigma: self.sigma, law: self.law, labels: self.labels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoroSettings {
    pub alpha: f64,
    pub iters: usize,
}

impl Default for DoroSettings {
    fn default() -> Self {
        Self { alpha: 1.0, iters: 2000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

/// One experiment: every (seed, ε, adversary, method) combination becomes a
/// row. `solver.epsilon` is overwritten by the sweep value of each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub loss: LossKind,
    pub data: DataConfig,
    pub adversaries: Vec<Adversary>,
    pub methods: Vec<Method>,
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub solver: PdhgConfig,
    /// `Δ` used for rows with `ε = 0` when the solver config sets none.
    #[serde(default = "default_zero_delta")]
    pub zero_epsilon_delta: f64,
    #[serde(default)]
    pub reference: ReferenceOptions,
    #[serde(default)]
    pub erm: ErmOptions,
    #[serde(default)]
    pub doro: DoroSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_zero_delta() -> f64 {
    1e-2
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let seeds = &self.data.seeds;
        if seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(invalid("seeds must be distinct"));
        }
        if self.sweep.is_empty() {
            return Err(invalid("the epsilon sweep is empty"));
        }
        if self.sweep.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("epsilon sweep must be strictly ascending"));
        }
        if let Some(&e) = self.sweep.iter().find(|&&e| !(0.0..0.25).contains(&e)) {
            return Err(invalid(format!("epsilon {e} outside [0, 1/4)")));
        }
        if self.methods.is_empty() || self.adversaries.is_empty() {
            return Err(invalid("methods and adversaries must be non-empty"));
        }
        if self.data.d == 0 || self.data.n == 0 {
            return Err(invalid("data dimensions must be positive"));
        }
        if self.data.planted().len() != self.data.d {
            return Err(DroError::DimensionMismatch { expected: self.data.d, found: self.data.planted().len() });
        }
        if !(self.doro.alpha > 0.0 && self.doro.alpha <= 1.0) {
            return Err(invalid(format!("doro alpha must lie in (0, 1], got {}", self.doro.alpha)));
        }
        if !(self.zero_epsilon_delta > 0.0) {
            return Err(invalid("zero_epsilon_delta must be positive"));
        }
        let mut probe = self.solver.clone();
        probe.epsilon = 0.0;
        probe.validate()
    }

    /// Solver settings for one sweep value.
    pub fn solver_for(&self, epsilon: f64) -> PdhgConfig {
        let mut cfg = self.solver.clone();
        cfg.epsilon = epsilon;
        cfg.zeta = 1.0;
        if epsilon == 0.0 && cfg.delta_override.is_none() {
            cfg.delta_override = Some(self.zero_epsilon_delta);
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "loss": "hinge",
        "data": {"d": 3, "n": 50, "labels": {"task": "classification", "flip_prob": 0.0}, "seeds": [1, 2]},
        "adversaries": [{"kind": "none"}],
        "methods": ["pdhg", "erm"],
        "sweep": [0.0]
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(cfg.data.planted(), vec![0.0, 1.0, 0.0]);
        assert_eq!(cfg.solver_for(0.0).delta_override, Some(1e-2));
        assert_eq!(cfg.reference.tol, 1e-6);
    }

    #[test]
    fn rejects_duplicate_seeds_and_unsorted_sweep() {
        let dup = MINIMAL.replace("[1, 2]", "[1, 1]");
        assert!(ExperimentConfig::from_json_str(&dup).is_err());
        let unsorted = MINIMAL.replace("[0.0]", "[0.1, 0.05]");
        assert!(ExperimentConfig::from_json_str(&unsorted).is_err());
    }
}
