use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type LabResult<T> = Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] erw_core::Error),
    #[error("at beta = {beta}: {source}")]
    AtGridPoint {
        beta: f64,
        #[source]
        source: erw_core::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl LabError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Exit status: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::SchemaVersion { .. } => 2,
            LabError::Core(erw_core::Error::InvalidParams(_)) => 2,
            _ => 3,
        }
    }
}
