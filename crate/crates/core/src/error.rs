use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum DroError {
    #[error("invalid label {label} for {loss} loss (expected -1 or +1)")]
    InvalidLabel { loss: &'static str, label: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("oracle contract breached at sample {index}: |beta| = {value} exceeds {bound}")]
    OracleContract { index: usize, value: f64, bound: f64 },

    #[error("iteration count T = {t} exceeds the configured cap {cap}")]
    IterationCap { t: usize, cap: usize },

    #[error("bisection did not converge within {0} iterations")]
    BisectionFailed(usize),

    #[error("trimming {trim} values from each end of {n} leaves nothing")]
    TrimmedAway { n: usize, trim: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DroError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DroError {
    DroError::InvalidParameter(msg.into())
}
