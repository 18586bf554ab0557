//! Library side of the `logit-sc` binary: configuration, subcommands and
//! report writers.

pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod report;
pub mod svg;

use thiserror::Error;

/// Exit code for a failed check or a runtime failure.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for a bad flag or configuration; clap uses the same code.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] logit_complexity::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Core(logit_complexity::Error::InvalidConfig(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
