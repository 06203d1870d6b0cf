use std::path::PathBuf;

/// Crate-wide error type. The CLI maps these onto exit codes:
/// configuration problems -> 2, I/O and format problems -> 3,
/// numeric failures -> 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("inertia matrix is singular (|det M| = {0:.3e})")]
    SingularInertia(f64),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path} row {row}: {msg}")]
    CsvParse {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code for the CLI, per the documented contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::ShapeMismatch { .. } => 2,
            Error::Io { .. } | Error::Checkpoint(_) | Error::CsvParse { .. } => 3,
            Error::NonFinite(_) | Error::SingularInertia(_) | Error::Numeric(_) => 4,
        }
    }
}
