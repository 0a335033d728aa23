//! Command implementations behind the `taxelsim` binary.

pub mod commands;
pub mod config;

pub use config::{Overrides, RunConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    /// Malformed input data or configuration.
    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] taxelsim::Error),
}

impl CliError {
    /// 1 usage, 2 I/O, 3 data or schema, 4 training.
    pub fn exit_code(&self) -> i32 {
        fn core(e: &taxelsim::Error) -> i32 {
            use taxelsim::Error::*;
            match e {
                Io { .. } => 2,
                Training(_) => 4,
                Fold { source, .. } => core(source),
                Domain(_) | Config(_) | Load { .. } | Schema { .. } | Json(_) => 3,
            }
        }
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 3,
            CliError::Core(e) => core(e),
        }
    }
}
