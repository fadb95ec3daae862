use std::path::PathBuf;

/// Errors surfaced by every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A user-supplied setting is invalid (odd batch size, unknown env name, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Tensor or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A caller passed data that cannot be consumed (NaN actions, stale caches, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// The operation is valid but the component has nothing to work with yet,
    /// e.g. sampling from an empty replay buffer.
    #[error("not ready: {0}")]
    NotReady(String),

    /// Non-finite values showed up where finite arithmetic was required.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A persisted file (checkpoint, demos, metrics) does not match its format.
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
