use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite amplitude encountered at index {0}")]
    NonFinite(usize),

    #[error("singular value decomposition did not converge")]
    SvdNotConverged,

    #[error("eigen-decomposition did not converge")]
    EigenNotConverged,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ensemble contains no spectra")]
    EmptyEnsemble,

    #[error("dimension mismatch: expected N = {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
