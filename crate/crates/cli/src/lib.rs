//! Batch driver: runs equilibrium, kick, quench and one-particle scenarios
//! from JSON configs and writes one CSV per data source.

pub mod config;
pub mod output;
pub mod runner;
pub mod validate;

use thiserror::Error;

pub use config::ProtocolConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] qfi_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
