//! Comparison methods and objective evaluation: a high-accuracy reference
//! solver, plain ERM, the trimmed-loss DORO iteration, and the regularized
//! DRO objective with a brute-force worst-case lower bound.

mod doro;
mod erm;
mod objective;
mod reference;

use serde::{Deserialize, Serialize};

pub use doro::{
    doro_cvar, doro_cvar_with, doro_eta, doro_trimmed_mean, DoroOptions, GlmObjective, SampleObjective, SquaredDistance,
    StepRule,
};
pub use erm::{erm_subgradient, erm_subgradient_with, ErmOptions};
pub use objective::{dro_objective_eval, dro_sup_lower_bound, SupBound, SupGrid};
pub use reference::{oracle_solve, oracle_solve_with, ReferenceOptions, ReferenceSchedule, ReferenceSolution};

/// Baseline selector for the command line and experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    OracleProxSubgradient,
    VanillaErm,
    DoroCvar { alpha: f64 },
    /// Iterated trimmed mean of the covariates.
    TrimmedMeanEstimation,
}

impl BaselineKind {
    pub fn validate(&self) -> crate::Result<()> {
        match *self {
            BaselineKind::DoroCvar { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                Err(crate::error::invalid(format!("alpha must lie in (0, 1], got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}
