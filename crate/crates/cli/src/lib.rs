//! Command-line front end for the EV-adoption commuter simulator: the
//! scenario file format, the built-in experiment presets, and the CSV
//! experiment runner.

pub mod experiment;
pub mod format;
pub mod presets;

use std::fmt;

pub use format::{apply_override, parse_scenario, serialize_canonical, ScenarioError};

/// Anything the front end can fail with.
#[derive(Debug)]
pub enum CliError {
    Scenario(ScenarioError),
    Run(evpark_core::RunError),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Scenario(e) => e.fmt(f),
            CliError::Run(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Scenario(e)
    }
}

impl From<evpark_core::RunError> for CliError {
    fn from(e: evpark_core::RunError) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
