use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model cannot be normalized (partition function {0})")]
    Unnormalizable(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("wrong encoding mode: expected {expected}, got {actual}")]
    WrongMode {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("degenerate bank: {0}")]
    DegenerateBank(String),

    #[error("target distribution is not normalized (total mass {0})")]
    NotNormalized(f64),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("problem dimension {dim} exceeds enumeration limit {limit}")]
    TooLarge { dim: usize, limit: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
