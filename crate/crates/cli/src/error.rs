use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure of a CLI command, carrying its process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] dstorus::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } | CliError::Format { .. } => 3,
            CliError::Core(e) => match e {
                dstorus::Error::NumericBreakdown(_) | dstorus::Error::NonFinite(_) | dstorus::Error::FitRejected(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().to_path_buf();
        move |source| CliError::Io { path, source }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> CliError {
        CliError::Format { path: path.as_ref().to_path_buf(), message: message.into() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
