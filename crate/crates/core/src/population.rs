//! Agent population synthesis.
//!
//! Car owners are generated from a small set of stereotypes, each giving a
//! population share, an energy-awareness sampling range, and a base
//! probability of buying an electric car. Stereotype head-counts are
//! allocated by deterministic largest-remainder quota rather than
//! independent draws, so rare stereotypes are present at their exact share
//! even in small populations.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::ConfigError;
use crate::rng::{weighted_index, SimRng};
use crate::tariff::{EmissionsCategory, StaffLevel, Vehicle};

/// One agent archetype: share of the population, energy-awareness sampling
/// range (0-100, continuous uniform), and base buy probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StereotypeSpec {
    pub id: u8,
    pub share: f64,
    pub ea_low: f64,
    pub ea_high: f64,
    pub buy_probability: f64,
}

impl StereotypeSpec {
    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if !(self.share.is_finite() && (0.0..=1.0).contains(&self.share)) {
            return Err(ConfigError::new(
                format!("{field}.share"),
                format!("must be in [0, 1], got {}", self.share),
            ));
        }
        if !(self.ea_low.is_finite() && self.ea_high.is_finite())
            || self.ea_low < 0.0
            || self.ea_high > 100.0
            || self.ea_low > self.ea_high
        {
            return Err(ConfigError::new(
                format!("{field}.ea_low/ea_high"),
                format!(
                    "need 0 <= low <= high <= 100, got [{}, {}]",
                    self.ea_low, self.ea_high
                ),
            ));
        }
        if !(self.buy_probability.is_finite() && (0.0..=1.0).contains(&self.buy_probability)) {
            return Err(ConfigError::new(
                format!("{field}.buy_probability"),
                format!("must be in [0, 1], got {}", self.buy_probability),
            ));
        }
        Ok(())
    }
}

/// The built-in four-stereotype survey: 1% highly aware near-certain
/// buyers down to a 60% low-awareness majority.
pub fn default_stereotypes() -> Vec<StereotypeSpec> {
    alloc::vec![
        StereotypeSpec { id: 1, share: 0.01, ea_low: 95.0, ea_high: 100.0, buy_probability: 0.9 },
        StereotypeSpec { id: 2, share: 0.09, ea_low: 70.0, ea_high: 94.0, buy_probability: 0.7 },
        StereotypeSpec { id: 3, share: 0.30, ea_low: 30.0, ea_high: 69.0, buy_probability: 0.4 },
        StereotypeSpec { id: 4, share: 0.60, ea_low: 0.0, ea_high: 29.0, buy_probability: 0.2 },
    ]
}

/// How per-agent cogency (persuasiveness of a word-of-mouth contact) is
/// assigned at sampling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CogencyDist {
    /// Every agent gets the scenario's `adoption_fraction`. Resolved to
    /// `Constant` by [`crate::scenario::ScenarioConfig::resolve`]; sampling
    /// rejects the unresolved form.
    AdoptionFraction,
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl CogencyDist {
    fn validate(&self) -> Result<(), ConfigError> {
        let ok = match *self {
            CogencyDist::AdoptionFraction => true,
            CogencyDist::Constant(c) => c.is_finite() && (0.0..=1.0).contains(&c),
            CogencyDist::Uniform { lo, hi } => {
                lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::new(
                "population.cogency",
                "cogency values must lie in [0, 1] with lo <= hi",
            ))
        }
    }
}

/// Complete description of the agent population to synthesize.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub stereotypes: Vec<StereotypeSpec>,
    pub n_agents: u32,
    /// Relative weights for staff levels 1-7.
    pub staff_level_weights: [f64; 7],
    /// Relative weights for initial emissions categories A-E of the
    /// (all-conventional) starting fleet.
    pub fleet_category_weights: [f64; 5],
    pub cogency: CogencyDist,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            stereotypes: default_stereotypes(),
            n_agents: 500,
            staff_level_weights: [1.0; 7],
            fleet_category_weights: [1.0; 5],
            cogency: CogencyDist::AdoptionFraction,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.stereotypes.is_empty() {
            return Err(ConfigError::new(
                "population.stereotypes",
                "at least one stereotype is required",
            ));
        }
        for (i, s) in self.stereotypes.iter().enumerate() {
            s.validate(&format!("population.stereotype{}", i + 1))?;
        }
        let share_sum: f64 = self.stereotypes.iter().map(|s| s.share).sum();
        if (share_sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::new(
                "population.stereotypes",
                format!("shares must sum to 1, got {share_sum}"),
            ));
        }
        validate_weights(&self.staff_level_weights, "population.staff_level_weights")?;
        validate_weights(
            &self.fleet_category_weights,
            "population.fleet_category_weights",
        )?;
        self.cogency.validate()
    }
}

fn validate_weights(weights: &[f64], field: &str) -> Result<(), ConfigError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(ConfigError::new(
            field,
            "weights must be finite and non-negative",
        ));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(ConfigError::new(
            field,
            "at least one weight must be positive",
        ));
    }
    Ok(())
}

/// Where an agent is in its daily commute cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommuteState {
    AtHome,
    WayWork,
    AtWork,
    WayHome,
}

/// One commuter. `adopted_at` is set exactly once, on the day the vehicle
/// switches from conventional to electric, and never cleared.
#[derive(Debug, Clone, PartialEq)]
pub struct CarOwner {
    pub id: u32,
    pub stereotype_id: u8,
    pub energy_awareness: f64,
    pub staff_level: StaffLevel,
    pub vehicle: Vehicle,
    pub cogency: f64,
    pub commute_state: CommuteState,
    pub adopted_at: Option<u32>,
}

/// Per-stereotype head counts by largest-remainder quota: floor the exact
/// quotas, then hand the leftover seats to the largest fractional
/// remainders (ties to the earlier stereotype). Counts always sum to `n`
/// and each differs from its exact quota by less than one.
pub fn quota_counts(shares: &[f64], n: u32) -> Vec<u32> {
    let mut counts: Vec<u32> = Vec::with_capacity(shares.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(shares.len());
    let mut assigned = 0u32;
    for (i, &share) in shares.iter().enumerate() {
        let quota = share * n as f64;
        let floor = libm::floor(quota);
        counts.push(floor as u32);
        assigned += floor as u32;
        remainders.push((i, quota - floor));
    }
    // Sort by descending remainder, index ascending on ties.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut leftover = n - assigned;
    for (i, _) in remainders {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    counts
}

/// Synthesizes the agent population.
///
/// Agents are created stereotype by stereotype in spec order, with ids
/// assigned sequentially from 0, all conventional, all at home. A given
/// `(spec, rng state)` produces a bit-identical population.
pub fn sample_population(
    spec: &PopulationSpec,
    rng: &mut SimRng,
) -> Result<Vec<CarOwner>, ConfigError> {
    spec.validate()?;
    let cogency = match spec.cogency {
        CogencyDist::AdoptionFraction => {
            return Err(ConfigError::new(
                "population.cogency",
                "unresolved: resolve the scenario before sampling",
            ))
        }
        other => other,
    };

    let shares: Vec<f64> = spec.stereotypes.iter().map(|s| s.share).collect();
    let counts = quota_counts(&shares, spec.n_agents);

    let mut agents = Vec::with_capacity(spec.n_agents as usize);
    let mut next_id = 0u32;
    for (stereotype, count) in spec.stereotypes.iter().zip(counts) {
        for _ in 0..count {
            let u: f64 = rng.gen();
            let energy_awareness =
                stereotype.ea_low + u * (stereotype.ea_high - stereotype.ea_low);
            let staff_level =
                StaffLevel::new(weighted_index(&spec.staff_level_weights, rng) as u8 + 1)
                    .expect("index in 0..7");
            let category = EmissionsCategory::from_index(weighted_index(
                &spec.fleet_category_weights,
                rng,
            ))
            .expect("index in 0..5");
            let cogency = match cogency {
                CogencyDist::Constant(c) => c,
                CogencyDist::Uniform { lo, hi } => lo + rng.gen::<f64>() * (hi - lo),
                CogencyDist::AdoptionFraction => unreachable!(),
            };
            agents.push(CarOwner {
                id: next_id,
                stereotype_id: stereotype.id,
                energy_awareness,
                staff_level,
                vehicle: Vehicle::Conventional(category),
                cogency,
                commute_state: CommuteState::AtHome,
                adopted_at: None,
            });
            next_id += 1;
        }
    }
    Ok(agents)
}

/// Analytic expected fraction of agents whose energy awareness strictly
/// exceeds `threshold`: sum over stereotypes of share times the uniform
/// tail probability.
pub fn eligible_fraction(spec: &PopulationSpec, threshold: f64) -> f64 {
    spec.stereotypes
        .iter()
        .map(|s| {
            let tail = if s.ea_high == s.ea_low {
                if s.ea_low > threshold {
                    1.0
                } else {
                    0.0
                }
            } else if threshold <= s.ea_low {
                1.0
            } else if threshold >= s.ea_high {
                0.0
            } else {
                (s.ea_high - threshold) / (s.ea_high - s.ea_low)
            };
            s.share * tail
        })
        .sum()
}
