use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),
    #[error(transparent)]
    Core(#[from] cdnn_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report {path}: {message}")]
    Report { path: PathBuf, message: String },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure stems from user configuration rather than a run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            BenchError::Config(_)
                | BenchError::Core(cdnn_core::Error::InvalidConfig(_))
                | BenchError::Core(cdnn_core::Error::Split(_))
        )
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
