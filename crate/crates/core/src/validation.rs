//! System-dynamics diffusion oracle.
//!
//! The mixed-influence diffusion ODE
//!
//! ```text
//! dA/dt = (p + q * A / N) * (N - A),    A(0) = 0
//! ```
//!
//! with innovation coefficient `p` (maps to the agent model's ad rate) and
//! imitation coefficient `q` (maps to contact rate times cogency) has the
//! closed form
//!
//! ```text
//! A(t) = N * (1 - e^{-(p+q)t}) / (1 + (q/p) e^{-(p+q)t})
//! ```
//!
//! for `p > 0`. Both the closed form and a fixed-step RK4 integration are
//! provided so each can check the other, and either can serve as the
//! reference trajectory a reduced-mode agent run must reproduce.

use alloc::vec::Vec;

use crate::adoption::DAYS_PER_YEAR;
use crate::error::ConfigError;

/// Parameters of the diffusion oracle. Rates are per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BassParams {
    pub p: f64,
    pub q: f64,
    /// Market size, in agents.
    pub n_total: f64,
    pub horizon_years: f64,
    /// RK4 step in years; at most 0.01.
    pub dt: f64,
}

impl BassParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.p.is_finite() || self.p < 0.0 || !self.q.is_finite() || self.q < 0.0 {
            return Err(ConfigError::new("bass.p/q", "rates must be non-negative"));
        }
        if !self.n_total.is_finite() || self.n_total < 0.0 {
            return Err(ConfigError::new("bass.n_total", "must be non-negative"));
        }
        if !self.horizon_years.is_finite() || self.horizon_years < 0.0 {
            return Err(ConfigError::new("bass.horizon_years", "must be non-negative"));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 || self.dt > 0.01 {
            return Err(ConfigError::new("bass.dt", "must lie in (0, 0.01]"));
        }
        Ok(())
    }
}

/// Expected adopters at `t` years by the closed form. Defined for `p > 0`
/// only; with no innovation channel use [`bass_ode`].
pub fn bass_closed_form(params: &BassParams, t: f64) -> Result<f64, ConfigError> {
    if params.p <= 0.0 {
        return Err(ConfigError::new(
            "bass.p",
            "closed form requires p > 0; integrate the ODE instead",
        ));
    }
    let decay = libm::exp(-(params.p + params.q) * t);
    Ok(params.n_total * (1.0 - decay) / (1.0 + (params.q / params.p) * decay))
}

/// Integrates the diffusion ODE with fixed-step RK4 and returns the
/// trajectory sampled at the end of each simulated day: entry `d` is
/// A((d+1)/365.25 years). Supports `p = 0`.
pub fn bass_ode(params: &BassParams) -> Result<Vec<f64>, ConfigError> {
    params.validate()?;
    let days = libm::floor(params.horizon_years * DAYS_PER_YEAR) as usize;
    Ok(bass_ode_days(params, days))
}

/// As [`bass_ode`], but for an explicit number of days (the grid the
/// engine's metrics use).
pub fn bass_ode_days(params: &BassParams, days: usize) -> Vec<f64> {
    let day_len = 1.0 / DAYS_PER_YEAR;
    let steps_per_day = libm::ceil(day_len / params.dt) as usize;
    let h = day_len / steps_per_day as f64;
    let deriv = |a: f64| (params.p + params.q * a / params.n_total) * (params.n_total - a);

    let mut trajectory = Vec::with_capacity(days);
    let mut a = 0.0;
    for _ in 0..days {
        for _ in 0..steps_per_day {
            let k1 = deriv(a);
            let k2 = deriv(a + 0.5 * h * k1);
            let k3 = deriv(a + 0.5 * h * k2);
            let k4 = deriv(a + h * k3);
            a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        trajectory.push(a);
    }
    trajectory
}

/// Largest absolute pointwise gap between two trajectories on the same day
/// grid.
pub fn compare_abm_to_sd(abm_mean: &[f64], sd: &[f64]) -> Result<f64, ConfigError> {
    if abm_mean.len() != sd.len() {
        return Err(ConfigError::new(
            "comparison grid",
            "trajectories must be sampled on the same day grid",
        ));
    }
    Ok(abm_mean
        .iter()
        .zip(sd)
        .map(|(a, s)| libm::fabs(a - s))
        .fold(0.0, f64::max))
}
