use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("code dimension {k} too large for brute-force ML decoding (limit {limit})")]
    CodeTooLarge { k: usize, limit: usize },

    #[error("invalid order-statistic index: {0}")]
    InvalidIndex(String),

    #[error("zero pattern has no constraint chain")]
    ZeroPattern,

    #[error("pattern set is not a logistic-weight set: {0}")]
    NotLogisticWeightSet(String),

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("candidate horizon of {horizon} exhausted before the pruning bound fired; use a larger horizon")]
    HorizonExhausted { horizon: usize },

    #[error("candidate stream exhausted after {emitted} patterns")]
    StreamExhausted { emitted: usize },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
