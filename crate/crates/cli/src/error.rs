use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A verification check exceeded its tolerance.
    pub const CHECK_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const ORACLE: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("oracle error: {0}")]
    Oracle(fenchel_duo::Error),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Oracle(_) => exit::ORACLE,
            CliError::Check(_) => exit::CHECK_FAILED,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Construction-time failures are configuration problems; everything
    /// raised while iterating is an oracle problem.
    pub(crate) fn building(e: fenchel_duo::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<fenchel_duo::Error> for CliError {
    fn from(e: fenchel_duo::Error) -> Self {
        CliError::Oracle(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
