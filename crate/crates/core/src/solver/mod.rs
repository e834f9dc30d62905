//! Primal-dual solver with an inexact hybrid-gradient oracle, its schedules,
//! the step-size search and the arbitrary-mean pipeline.

mod config;
mod idealized;
mod pdhg;
mod pipeline;
mod tune;

pub use config::{schedule, OracleMode, PdhgConfig, Schedule, SigmaMode};
pub use idealized::{idealized_pdhg, IdealizedRun};
pub use pdhg::{
    pdhg_solve, pdhg_solve_with, primal_step, ExactOracle, FilterOracle, GradientOracle, IterationView, SolveResult,
};
pub use pipeline::{clip_weight, pipeline, uncenter};
pub use tune::{candidate_distances, robust_objective_estimate, tune_gamma, tune_gamma_traced, TuneCandidate, TuneOutcome};
