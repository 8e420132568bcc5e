use thiserror::Error;

/// Errors produced by the numerical routines and the file codecs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("point {0} lies outside [-1, 1]")]
    OutsideInterval(f64),

    #[error("eigen-solver did not converge for index {index}: {reason}")]
    EigenNonConvergence { index: usize, reason: String },

    #[error("degenerate eigenfunction at index {0}")]
    Degenerate(usize),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
