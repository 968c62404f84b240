use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph order n={n} is outside the supported range 1..={max}")]
    OrderOutOfRange { n: usize, max: usize },

    #[error("index {index} is out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index set must not be empty")]
    EmptyIndexSet,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("capacity exceeded: {needed} positions requested but the inner code has {available}")]
    CapacityExceeded { needed: usize, available: usize },

    #[error("swap precondition violated: {0}")]
    SwapPrecondition(String),

    #[error("unsupported local-global regime: {0}")]
    UnsupportedRegime(String),

    #[error("insufficient samples: {got} < {min}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, len })
    }
}
