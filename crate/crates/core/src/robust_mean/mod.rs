//! Robust mean estimation by spectral filtering, stability diagnostics and the
//! hybrid-gradient oracle used by the solver.

mod filter;
mod oracle;
mod spectral;
mod stability;
mod trimmed;

pub use filter::{robust_mean_estimation, robust_mean_estimation_with_state, FilterState, RobustMeanEstimate};
pub use oracle::{exact_hybrid_gradient, inexact_hybrid_gradient_oracle};
pub use spectral::{power_iteration, top_eigenvector, PowerOptions};
pub use stability::{stability_check, stability_check_with, stability_filter, StabilityReport, C_STAB};
pub use trimmed::trimmed_mean_1d;
