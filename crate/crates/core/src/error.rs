use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// The filter fixed point did not settle; the last iterate is attached.
    #[error("fixed-point iteration stopped after {iterations} iterations with step {last_step:e}")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        last_w: Vec<Complex64>,
        last_f: Vec<Complex64>,
    },

    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    UnsupportedSize { size: u128, limit: u128 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
