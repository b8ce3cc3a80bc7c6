use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid-parameter: {0}")]
    InvalidParameter(String),

    #[error("pole-evaluation: |1 + mu*q| = {magnitude:e} at stage {stage}")]
    PoleEvaluation { stage: usize, magnitude: f64 },

    #[error("numeric-instability: time constants {a} and {b} are too close for partial fractions")]
    NumericInstability { a: f64, b: f64 },

    #[error("shape-mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("insufficient-history: need {needed} samples, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("too-small-image: extent {extent} along the derivative axis, need at least 3")]
    TooSmallImage { extent: usize },

    #[error("no-maximum-found: response still rising at horizon {horizon}")]
    NoMaximumFound { horizon: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
