//! Pipeline orchestration for the `covtraj` command line tool: TOML
//! configuration, state loading (inline simulation, binary trajectories, or
//! CSV series), descriptor construction, and artifact emission.

pub mod config;
pub mod pipeline;
pub mod report;

use std::fmt;

/// Errors split by exit status: validation problems exit 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<covtraj::Error> for CliError {
    fn from(err: covtraj::Error) -> Self {
        use covtraj::Error as E;
        let msg = err.to_string();
        match err {
            E::Io(_) | E::PairOverlap { .. } | E::IntegrationBlowUp { .. } => {
                CliError::Runtime(msg)
            }
            _ => CliError::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
