//! Process-level error buckets with the stable exit-code contract:
//! 0 success, 2 input error, 3 transport error, 4 missing artifact.

use mixsum_core::baselines::BaselineError;
use mixsum_core::dataset::DatasetError;
use mixsum_core::model::ModelError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Transport(String),
    MissingArtifact(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Transport(_) => 3,
            CliError::MissingArtifact(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Transport(m) => write!(f, "{m}"),
            CliError::MissingArtifact(m) => write!(f, "{m}"),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Transport { .. } => CliError::Transport(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Transport(inner) => CliError::Transport(inner.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Checkpoint(m) => CliError::MissingArtifact(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<mixsum_core::dataset::TransportError> for CliError {
    fn from(e: mixsum_core::dataset::TransportError) -> Self {
        CliError::Transport(e.to_string())
    }
}
