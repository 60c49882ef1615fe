use thiserror::Error;

use crate::circle::CircleError;

/// Errors raised across the measurement, window-design and recovery pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sample {index} is (numerically) zero; instantaneous frequency is undefined there")]
    ZeroSample { index: usize },

    #[error("window spectrum is identically zero")]
    AllZero,

    #[error("window construction failed after {attempts} attempts")]
    ConstructionFailed { attempts: usize },

    #[error("window set rejected: {0}")]
    InvalidWindow(String),

    #[error("missing measurement (window {window}, k {k}, m {m})")]
    MissingMeasurement { window: usize, k: usize, m: usize },

    #[error("degenerate signal at step k={k}: {reason}")]
    DegenerateSignal { k: usize, reason: String },

    #[error("measurements inconsistent at step k={k}: residual {residual:e}")]
    NoCommonPoint { k: usize, residual: f64 },

    #[error("A0 matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularA0 { condition: f64 },

    #[error("consistency check failed: {0}")]
    ConsistencyFailure(String),

    #[error("both sign branches reproduce the measurements (residuals {residuals:?})")]
    AmbiguousBranch { residuals: [f64; 2] },

    #[error("no sign branch reproduces the measurements")]
    NoBranch,

    #[error(transparent)]
    Circle(#[from] CircleError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-friendly tag, used as the status column in trial reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) | Error::LengthMismatch { .. } => "invalid",
            Error::ZeroSample { .. } => "zero_sample",
            Error::AllZero => "all_zero",
            Error::ConstructionFailed { .. } => "construction",
            Error::InvalidWindow(_) => "invalid_window",
            Error::MissingMeasurement { .. } => "missing_measurement",
            Error::DegenerateSignal { .. } => "degenerate",
            Error::NoCommonPoint { .. } => "no_common_point",
            Error::SingularA0 { .. } => "singular_a0",
            Error::ConsistencyFailure(_) => "consistency",
            Error::AmbiguousBranch { .. } => "ambiguous",
            Error::NoBranch => "no_branch",
            Error::Circle(_) => "circle",
        }
    }
}
