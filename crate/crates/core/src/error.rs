use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid membership entry at row {row}, column {col}: {reason}")]
    InvalidEntry {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("agreement undefined: {0}")]
    UndefinedAgreement(String),

    #[error("outside the density domain: {0}")]
    Domain(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Capability(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last iterate {last:?})")]
    NonConvergence { iterations: usize, last: Vec<f64> },

    #[error("adjustment undefined: expected index {expected} leaves no room below the maximum")]
    UndefinedAdjustment { expected: f64 },
}

impl Error {
    /// Whether the failure is numerical (as opposed to a bad input or call).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UndefinedAdjustment { .. } | Error::NonConvergence { .. } | Error::Domain(_)
        )
    }

    /// Whether the failure comes from the caller asking for an unsupported combination.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Unsupported(_) | Error::Capability(_) | Error::Parameter(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
