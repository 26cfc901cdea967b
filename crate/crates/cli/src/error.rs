use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Solver(#[from] swimflow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit statuses of the command-line tool.
pub mod exit {
    pub const OK: u8 = 0;
    pub const NUMERIC: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const CHECK: u8 = 3;
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use swimflow::Error as E;
        match self {
            Self::Solver(E::NonFinite { .. } | E::AprioriViolation { .. }) => exit::NUMERIC,
            _ => exit::CONFIG,
        }
    }
}
