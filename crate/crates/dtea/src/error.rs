use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Validation(dtea_core::Error),
    #[error("simulation failed: {0}")]
    Simulation(dtea_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl CliError {
    /// 1 for anything the caller can fix by changing the invocation or its
    /// inputs, 2 when the simulation itself fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Simulation(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<dtea_core::Error> for CliError {
    fn from(e: dtea_core::Error) -> Self {
        use dtea_core::Error as E;
        match e {
            E::Invalid(_) | E::BadArgument(_) | E::NonPositiveStiffness { .. } => {
                CliError::Validation(e)
            }
            _ => CliError::Simulation(e),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
