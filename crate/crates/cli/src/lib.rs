//! Config-driven experiment harness around `cocreate-core`: training runs,
//! evaluation, baseline comparisons, parameter sweeps and lifelog ingestion,
//! each leaving a manifest with content hashes of everything it wrote.

pub mod commands;
pub mod config;
pub mod output;

use cocreate_core::agent::AgentError;
use cocreate_core::baselines::BaselineError;
use cocreate_core::behavior::BehaviorError;
use cocreate_core::neural::NeuralError;
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("training diverged: {0}")]
    Divergence(String),
}

impl CliError {
    pub const CONFIG_EXIT: i32 = 3;
    pub const RUNTIME_EXIT: i32 = 4;
    pub const DIVERGENCE_EXIT: i32 = 5;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => Self::CONFIG_EXIT,
            CliError::Runtime(_) => Self::RUNTIME_EXIT,
            CliError::Divergence(_) => Self::DIVERGENCE_EXIT,
        }
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Divergence { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Agent(a) => a.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<BehaviorError> for CliError {
    fn from(e: BehaviorError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
