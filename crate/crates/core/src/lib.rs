//! Outlier-robust Wasserstein-1 distributionally robust optimization for
//! generalized linear models.
//!
//! The crate is organised bottom-up:
//!
//! * [`losses`]: scalar GLM losses, their convex conjugates, the 1-d dual
//!   proximal maps and the norm regularizer.
//! * [`data`]: synthetic data, covariate transforms, contamination adversaries
//!   and dataset I/O.
//! * [`robust_mean`]: spectral filtering for robust mean estimation and the
//!   inexact hybrid-gradient oracle built on it.
//! * [`solver`]: the primal-dual solver with diminishing primal
//!   regularization, step-size search and the arbitrary-mean pipeline.
//! * [`baselines`]: reference solver, ERM, trimmed-loss iteration and
//!   objective evaluation.
//! * [`harness`]: experiment configuration, sweeps and reports.

pub mod baselines;
pub mod data;
pub mod error;
pub mod harness;
pub(crate) mod linalg;
pub mod losses;
pub mod robust_mean;
pub mod solver;

pub use baselines::{dro_objective_eval, oracle_solve, ReferenceSolution};
pub use data::{ContaminationSpec, Adversary, Dataset};
pub use error::{DroError, Result};
pub use losses::{DualNorm, Extended, LossFamily, LossKind, NormRegularizer};
pub use robust_mean::{robust_mean_estimation, top_eigenvector};
pub use solver::{pdhg_solve, pipeline, tune_gamma, PdhgConfig, SolveResult};
