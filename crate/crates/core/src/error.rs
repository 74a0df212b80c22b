use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("grid mismatch: {left} vs {right} modes")]
    Shape { left: usize, right: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("block index {q} outside [-1, {q_max}]")]
    BlockIndex { q: i32, q_max: i32 },

    #[error("inconsistent reduction: {0}")]
    InconsistentReduction(String),

    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}
