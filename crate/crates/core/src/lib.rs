//! Deterministic agent-based simulator of electric-vehicle adoption in a
//! commuter population.
//!
//! The model couples three mechanisms:
//!
//! * a daily commute in which every car owner parks in a shared lot on
//!   workdays ([`mobility`]),
//! * a parking-charge policy that prices conventional vehicles by emissions
//!   category and staff level, with configurable EV treatment ([`tariff`]),
//! * an innovation-diffusion process in which owners adopt electric vehicles
//!   under advertising exposure and word-of-mouth contact, gated by an
//!   energy-awareness threshold ([`adoption`]).
//!
//! [`engine::run`] executes one fully deterministic simulation for a
//! `(scenario, seed)` pair; [`engine::run_replications`] aggregates
//! independent replications. [`validation`] provides a system-dynamics
//! mixed-influence diffusion oracle (closed form and RK4) against which the
//! agent model can be cross-checked.
//!
//! The crate is `no_std` (with `alloc`) and keeps all floating-point math on
//! `libm`, so a given `(scenario, seed)` produces bit-identical results
//! across platforms. All randomness flows through a single seeded stream
//! consumed in deterministic event order.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adoption;
pub mod engine;
pub mod error;
pub mod mobility;
pub mod population;
pub mod rng;
pub mod scenario;
pub mod tariff;
pub mod validation;

pub use engine::{run, run_replications, MetricsSeries, RunResult};
pub use error::{ConfigError, ProtocolError, RunError};
pub use scenario::ScenarioConfig;
