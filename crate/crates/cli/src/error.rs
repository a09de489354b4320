use mhc_core::MhcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input content or arguments; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Filesystem failure; exit code 2.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<MhcError> for CliError {
    fn from(e: MhcError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
