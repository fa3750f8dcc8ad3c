use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] gie_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 invalid configuration, 2 truncation overflow, 3 numerical guard,
    /// 4 I/O failure.
    pub fn exit_code(&self) -> i32 {
        use gie_core::Error as E;
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                E::TruncationOverflow { .. } => 2,
                E::NumericalGuard { .. } | E::Linalg(_) | E::NotHermitian { .. } => 3,
                _ => 1,
            },
        }
    }
}
