use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed word `{0}`")]
    MalformedWord(String),

    #[error("letter {letter} outside alphabet of dimension {dim}")]
    LetterOutOfRange { letter: usize, dim: usize },

    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("insufficient signature depth: need level {needed}, have {have}")]
    InsufficientDepth { needed: usize, have: usize },

    #[error("signature shape mismatch: (dim {0}, level {1}) vs (dim {2}, level {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("empty word is not allowed here")]
    EmptyWord,

    #[error("path sample times must be strictly increasing (index {0})")]
    NonIncreasingTimes(usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("correlation {rho} is not critical for m = {m}; use moment_predicate")]
    NotCritical { rho: f64, m: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
