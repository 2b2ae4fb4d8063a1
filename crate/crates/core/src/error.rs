use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input data violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A record in a line-delimited file could not be parsed.
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    /// An API was called in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("layout overflow: {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("remote service error: {0}")]
    Remote(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
