use std::path::PathBuf;

use thiserror::Error;
use windroute_core::ingest::IngestError;
use windroute_core::sim::SimError;
use windroute_core::windmodel::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{failed} of {total} flights failed:\n{details}")]
    Flights { failed: usize, total: usize, details: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit status. 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Ingest(IngestError::Io { .. }) => 7,
            CliError::Ingest(_) => 4,
            CliError::Model(_) => 5,
            CliError::Sim(SimError::Model(_)) => 5,
            CliError::Sim(_) | CliError::Flights { .. } => 6,
            CliError::Io { .. } => 7,
        }
    }
}
