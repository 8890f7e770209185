use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    /// A named structural invariant (hermitian, psd, trace, cptp, ...) failed.
    #[error("{invariant} check failed: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    /// Conditional quantity requested for an outcome that (almost) never occurs.
    #[error("outcome {outcome:?} has probability {probability:e}, below the conditioning floor")]
    ZeroProbability { outcome: String, probability: f64 },

    #[error("unknown outcome label {0:?}")]
    UnknownOutcome(String),
}

impl Error {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            detail: detail.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent input, as opposed
    /// to a numerical breakdown on valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. } | Error::Invariant { .. } | Error::UnknownOutcome(_)
        )
    }
}
