//! Command-line front end: ROC experiment presets, config-driven runs, theory
//! tables and the self-check suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod preset;

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] onebit::Error),
    #[error("self-check failed")]
    CheckFailed,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 1 for a failed check, 2 for anything that stopped the command from
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            _ => 2,
        }
    }
}
