//! Error types shared across the simulator.

use alloc::string::String;
use core::fmt;

/// A scenario or parameter failed validation. Carries the dotted name of the
/// offending field so front ends can point at the exact input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.reason)
    }
}

impl core::error::Error for ConfigError {}

/// An internal simulation invariant was violated (an agent requesting two
/// parking spaces, a purchase trigger delivered to an adopter, a
/// non-monotone clock). These indicate a bug, not bad input; the engine
/// aborts the run and reports when and for whom it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolError {
    /// Minutes since run start, when known.
    pub time_min: Option<u64>,
    /// Offending agent id, when known.
    pub agent: Option<u32>,
    pub detail: String,
}

impl ProtocolError {
    pub fn new(detail: impl Into<String>) -> Self {
        ProtocolError {
            time_min: None,
            agent: None,
            detail: detail.into(),
        }
    }

    pub fn for_agent(agent: u32, detail: impl Into<String>) -> Self {
        ProtocolError {
            time_min: None,
            agent: Some(agent),
            detail: detail.into(),
        }
    }

    pub fn at(mut self, time_min: u64) -> Self {
        self.time_min = Some(time_min);
        self
    }
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "protocol violation")?;
        if let Some(t) = self.time_min {
            write!(f, " at day {} minute {}", t / 1440, t % 1440)?;
        }
        if let Some(a) = self.agent {
            write!(f, " (agent {})", a)?;
        }
        write!(f, ": {}", self.detail)
    }
}

impl core::error::Error for ProtocolError {}

/// Anything that can abort a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(ConfigError),
    Protocol(ProtocolError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Protocol(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<ProtocolError> for RunError {
    fn from(e: ProtocolError) -> Self {
        RunError::Protocol(e)
    }
}
