//! Experiment orchestration for the follow-the-leader simulator: strict
//! configuration, typed Monte Carlo drivers, and reproducible result files.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;

use ftl_core::estimators::EstimatorError;
use ftl_core::kernel::KernelError;
use ftl_core::ModelError;
use thiserror::Error;

pub use commands::{run_command, Report};
pub use config::{Command, ExperimentConfig, LogKind, Start, Workers};
pub use output::{run_experiment, RunManifest, MANIFEST_SCHEMA_VERSION};

/// Invalid configuration; maps to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("`{key}` {message}")]
    Range { key: String, message: String },
    #[error("no command given")]
    MissingCommand,
    #[error("cannot read config: {0}")]
    Read(String),
}

/// Failure while running an experiment; maps to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
