use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain (negative pressure, bad dimensions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration: malformed partitions, duplicate names, unmapped labels.
    #[error("configuration error: {0}")]
    Config(String),

    /// A dataset or model file that does not match the expected schema.
    #[error("{path}: line {line}: {message}")]
    Load {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema mismatch: expected version {expected}, found {found}")]
    Schema { expected: u32, found: u32 },

    #[error("training failed: {0}")]
    Training(String),

    /// Failure inside one leave-one-out fold.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
