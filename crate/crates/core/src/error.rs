use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0:?} lies outside [-1,1]^d")]
    OutsideDomain(Vec<f64>),

    #[error("sample is empty")]
    EmptySample,

    #[error("cell enumeration needs {needed} cells, cap is {cap}")]
    TooManyCells { needed: u128, cap: u128 },

    #[error("exhaustive search over {occupied} occupied cells exceeds the limit of {limit}")]
    Capacity { occupied: usize, limit: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("beta = {beta} violates beta <= kappa/gamma = {bound}; the cell-width schedule is only derived in that regime")]
    OutOfRegime { beta: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
