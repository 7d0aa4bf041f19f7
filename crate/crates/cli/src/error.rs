use std::path::PathBuf;

use shapelet_core::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed input file or artifact.
    #[error("{0}")]
    Format(String),

    /// Artifacts that do not belong together, or bad arguments.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        CliError::Format(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        CliError::Mismatch(msg.into())
    }

    /// 0 ok, 1 IO, 2 validation, 3 empty result, 4 format error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(CoreError::EmptyResult { .. }) => 3,
            CliError::Core(_) | CliError::Mismatch(_) => 2,
            CliError::Format(_) => 4,
        }
    }
}
