//! Diffusion dynamics: advertising exposure, word-of-mouth contact, and the
//! gated purchase decision.
//!
//! A conventional-vehicle owner adopts when a purchase trigger (an ad
//! exposure or a received "buy" message) passes three checks in order:
//! the energy-awareness gate (strict `>` against the scenario threshold),
//! message transmission for word-of-mouth (Bernoulli on the sender's
//! cogency), and the purchase Bernoulli on the stereotype's buy probability
//! scaled by the financial-incentive multiplier. Every trigger is an
//! independent chance; adoption is irreversible.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::ProtocolError;
use crate::population::{CarOwner, StereotypeSpec};
use crate::rng::{exp_waiting_time, PoissonSampler, SimRng};
use crate::tariff::{TariffPolicy, Vehicle};

/// Days per year used for all per-year to per-day rate conversions.
pub const DAYS_PER_YEAR: f64 = 365.25;

/// Years over which the EV price premium and the purchase subsidy are
/// spread when compared against annual parking-charge savings.
pub const AMORTIZATION_YEARS: f64 = 5.0;

/// Diffusion and incentive parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionParams {
    /// Ad exposures per agent per year (Poisson intensity).
    pub ad_rate: f64,
    /// Contacts initiated per adopter per year.
    pub contact_rate: f64,
    /// Default cogency: probability that a contact transmits the buy
    /// message.
    pub adoption_fraction: f64,
    /// Energy-awareness gate, 0-100.
    pub awareness_threshold: f64,
    /// Sensitivity of the purchase probability to annual net savings as a
    /// fraction of salary. Zero switches financial incentives off exactly.
    pub incentive_beta: f64,
    /// Purchase subsidy: fraction of the EV price premium, capped.
    pub subsidy_fraction: f64,
    pub subsidy_cap: f64,
    /// Price premium of an electric vehicle over a comparable conventional
    /// one.
    pub ev_price: f64,
    /// Annual salary per staff level 1-7.
    pub salary_by_level: [f64; 7],
}

impl Default for AdoptionParams {
    fn default() -> Self {
        AdoptionParams {
            ad_rate: 0.011,
            contact_rate: 100.0,
            adoption_fraction: 0.015,
            awareness_threshold: 50.0,
            incentive_beta: 0.0,
            subsidy_fraction: 0.0,
            subsidy_cap: 0.0,
            ev_price: 0.0,
            salary_by_level: [
                18_000.0, 22_000.0, 27_000.0, 33_000.0, 40_000.0, 48_000.0, 60_000.0,
            ],
        }
    }
}

impl AdoptionParams {
    pub fn validate(&self) -> Result<(), crate::error::ConfigError> {
        use crate::error::ConfigError;
        let nonneg = [
            ("adoption.ad_rate", self.ad_rate),
            ("adoption.contact_rate", self.contact_rate),
            ("adoption.subsidy_cap", self.subsidy_cap),
            ("adoption.ev_price", self.ev_price),
        ];
        for (field, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(ConfigError::new(field, "must be finite and non-negative"));
            }
        }
        let probs = [
            ("adoption.adoption_fraction", self.adoption_fraction),
            ("adoption.subsidy_fraction", self.subsidy_fraction),
        ];
        for (field, v) in probs {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::new(field, "must be in [0, 1]"));
            }
        }
        if !self.awareness_threshold.is_finite()
            || !(0.0..=100.0).contains(&self.awareness_threshold)
        {
            return Err(ConfigError::new(
                "adoption.awareness_threshold",
                "must be in [0, 100]",
            ));
        }
        if !self.incentive_beta.is_finite() {
            return Err(ConfigError::new("adoption.incentive_beta", "must be finite"));
        }
        for w in self.salary_by_level.windows(2) {
            if w[1] <= w[0] {
                return Err(ConfigError::new(
                    "adoption.salary_by_level",
                    "salaries must strictly increase with level",
                ));
            }
        }
        if self.salary_by_level[0] <= 0.0 || !self.salary_by_level.iter().all(|s| s.is_finite()) {
            return Err(ConfigError::new(
                "adoption.salary_by_level",
                "salaries must be finite and positive",
            ));
        }
        Ok(())
    }

    pub fn salary(&self, level: crate::tariff::StaffLevel) -> f64 {
        self.salary_by_level[level.index()]
    }
}

/// What prompted a purchase decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerKind {
    /// Broadcast advertising; no sender.
    Ad,
    /// A "buy" message from an adopter.
    Wom { source: u32 },
}

/// A purchase trigger delivered to one owner on one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PurchaseTrigger {
    pub kind: TriggerKind,
    pub day: u32,
}

/// Waiting time in days until an agent's next ad exposure, exponentially
/// distributed with the per-day equivalent of `ad_rate`. `None` means ads
/// are off and the exposure never comes.
pub fn next_ad_exposure(params: &AdoptionParams, rng: &mut SimRng) -> Option<f64> {
    exp_waiting_time(params.ad_rate / DAYS_PER_YEAR, rng)
}

/// Daily word-of-mouth contact draws for a fixed population and parameter
/// set. Pays the Poisson setup cost once; one of these lives for a whole
/// run.
#[derive(Debug, Clone, Copy)]
pub struct ContactProcess {
    n_agents: u32,
    daily_contacts: PoissonSampler,
}

impl ContactProcess {
    pub fn new(params: &AdoptionParams, n_agents: u32) -> Self {
        ContactProcess {
            n_agents,
            daily_contacts: PoissonSampler::new(params.contact_rate / DAYS_PER_YEAR),
        }
    }

    /// Appends the ids `adopter_id` contacts over one day: a Poisson count
    /// at the daily contact rate, each aimed at a uniformly random *other*
    /// agent (the population is fully mixed). Populations below two have
    /// nobody to talk to.
    pub fn sample_into(&self, adopter_id: u32, rng: &mut SimRng, out: &mut Vec<u32>) {
        if self.n_agents < 2 {
            return;
        }
        let count = self.daily_contacts.sample(rng);
        for _ in 0..count {
            let other = rng.gen_range(0..self.n_agents - 1);
            out.push(if other >= adopter_id { other + 1 } else { other });
        }
    }
}

/// The ids an adopter contacts over one day. One-shot form of
/// [`ContactProcess::sample_into`].
pub fn wom_contacts(
    adopter_id: u32,
    n_agents: u32,
    params: &AdoptionParams,
    rng: &mut SimRng,
) -> Vec<u32> {
    let mut out = Vec::new();
    ContactProcess::new(params, n_agents).sample_into(adopter_id, rng, &mut out);
    out
}

/// Multiplier applied to the stereotype buy probability, reflecting how the
/// switch would land financially: annual parking-charge saving, plus the
/// amortized subsidy, minus the amortized price premium, all relative to
/// salary. Clamped to [0, 2]; exactly 1 when `incentive_beta` is zero.
pub fn incentive_multiplier(
    owner: &CarOwner,
    policy: &TariffPolicy,
    params: &AdoptionParams,
) -> f64 {
    if params.incentive_beta == 0.0 {
        return 1.0;
    }
    let category = match owner.vehicle {
        Vehicle::Conventional(cat) => cat,
        Vehicle::Electric => {
            debug_assert!(false, "incentive queried for an adopter");
            return 1.0;
        }
    };
    let saving =
        policy.lookup_charge(category, owner.staff_level) - policy.ev_charge(owner.staff_level);
    let subsidy = if params.subsidy_fraction * params.ev_price < params.subsidy_cap {
        params.subsidy_fraction * params.ev_price
    } else {
        params.subsidy_cap
    };
    let net_annual = saving + (subsidy - params.ev_price) / AMORTIZATION_YEARS;
    let factor = 1.0 + params.incentive_beta * net_annual / params.salary(owner.staff_level);
    factor.clamp(0.0, 2.0)
}

/// Decides whether `owner` adopts on this trigger, flipping the vehicle and
/// stamping `adopted_at` when it does.
///
/// `source_cogency` is the sender's cogency and is required for
/// word-of-mouth triggers. The call always consumes a fixed number of
/// random draws for its trigger kind (two for word of mouth, one for ads)
/// regardless of which check fails, so event streams cannot drift.
pub fn decide_purchase(
    owner: &mut CarOwner,
    trigger: &PurchaseTrigger,
    source_cogency: Option<f64>,
    stereotype: &StereotypeSpec,
    policy: &TariffPolicy,
    params: &AdoptionParams,
    rng: &mut SimRng,
) -> Result<bool, ProtocolError> {
    if owner.vehicle.is_electric() {
        return Err(ProtocolError::for_agent(
            owner.id,
            "purchase trigger delivered to an adopter",
        ));
    }
    let transmitted = match trigger.kind {
        TriggerKind::Ad => true,
        TriggerKind::Wom { source } => {
            let cogency = source_cogency.ok_or_else(|| {
                ProtocolError::for_agent(source, "word-of-mouth trigger without source cogency")
            })?;
            rng.gen::<f64>() < cogency
        }
    };
    let decision_draw: f64 = rng.gen();

    if owner.energy_awareness <= params.awareness_threshold || !transmitted {
        return Ok(false);
    }
    let p_buy = (stereotype.buy_probability * incentive_multiplier(owner, policy, params)).min(1.0);
    if decision_draw < p_buy {
        owner.vehicle = Vehicle::Electric;
        owner.adopted_at = Some(trigger.day);
        Ok(true)
    } else {
        Ok(false)
    }
}
