use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Solver(#[from] qdae::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for a model used outside its domain, 4 for
    /// numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Schema(_) => 2,
            CliError::Solver(e) => match e.root() {
                qdae::Error::ArcsinDomain { .. } => 3,
                qdae::Error::Config(_) | qdae::Error::UnknownVariable(_) | qdae::Error::GridMismatch(_) => 2,
                _ => 4,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
