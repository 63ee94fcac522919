use thiserror::Error;

/// Faults raised by the engine. Validation findings on a
/// [`DecisionProblem`](crate::model::DecisionProblem) are reported as data
/// through [`ValidationReport`](crate::model::ValidationReport), not here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecisionError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid permutation of {len} indices")]
    InvalidPermutation { len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing value for cue {cue}")]
    MissingCue { cue: usize },

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DecisionError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DecisionError {
    DecisionError::InvalidInput(msg.into())
}
