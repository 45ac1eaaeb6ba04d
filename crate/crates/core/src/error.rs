use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// File does not follow the expected layout (magic, version, shape).
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    /// File layout is fine but the payload is damaged or truncated.
    #[error("corrupt file {path}: {msg}")]
    Corruption { path: PathBuf, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data violates a contract (shape mismatch, missing labels, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// A computation produced NaN/inf or otherwise broke down numerically.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A metric is not defined for the given input.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
