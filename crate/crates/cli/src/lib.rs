pub mod args;
pub mod commands;
pub mod output;

use std::fmt;

pub use args::{Cli, Command, Format};
pub use commands::run;

/// Exit status for invalid flags or preconditions.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for solver failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(nosecone::Error),
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Encode(_) => EXIT_USAGE,
        }
    }

    pub(crate) fn encode<E: fmt::Display>(e: E) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "invalid input: {msg}"),
            CliError::Numerical(e) => write!(f, "solver failed: {e}"),
            CliError::Encode(msg) => write!(f, "output error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nosecone::Error> for CliError {
    fn from(e: nosecone::Error) -> Self {
        CliError::Numerical(e)
    }
}
