use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: conceptspace_core::Error,
    },
    #[error(transparent)]
    Core(#[from] conceptspace_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: malformed manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: input changed since the manifest was written (sha256 {expected}, now {found})")]
    DigestMismatch { path: PathBuf, expected: String, found: String },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit status: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(e) | AppError::Invalid { source: e, .. } if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
