use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FiberError>;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no fiber found: {0}")]
    NoFiber(String),

    #[error("undefined result: {0}")]
    UndefinedResult(String),

    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: unsupported schema version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("validation failed for {record}: {message}")]
    Validation { record: String, message: String },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl FiberError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FiberError::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FiberError::Io {
            path: path.into(),
            source,
        }
    }
}
