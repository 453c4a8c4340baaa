//! Manifest runner and self-test battery for `dkt-core`.

pub mod battery;
pub mod manifest;
pub mod report;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] dkt_core::DktError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code of the `run` subcommand.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }
}
