use thiserror::Error;

use crate::dist::FittedModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A statistic whose denominator (or radicand) vanished, e.g. an empty
    /// change-point window.
    #[error("{test}: degenerate statistic ({reason})")]
    Degenerate { test: String, reason: String },

    #[error("sample contains no events")]
    NoEvents,

    #[error("{family} fit did not converge after {evaluations} evaluations")]
    NotConverged {
        family: String,
        evaluations: usize,
        best: Box<FittedModel>,
    },

    #[error("censoring target {target} is unattainable (reachable range {min:.4}..{max:.4})")]
    UnattainableCensoring { target: f64, min: f64, max: f64 },

    #[error("covariance matrix is not positive definite after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(test: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            test: test.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's data or arguments rather than by
    /// a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Parse { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
