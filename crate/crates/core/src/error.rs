use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("{what} = {value} is out of range ({allowed})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        allowed: &'static str,
    },

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("rows are linearly dependent")]
    DependentRows,

    #[error("invalid point configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid tuple: {0}")]
    InvalidTuple(String),

    #[error("weights sum to {0}, expected 1")]
    WeightSum(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
