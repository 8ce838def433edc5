//! The resolved description of one simulation run.
//!
//! `ScenarioConfig` collects every parameter the engine needs. Front ends
//! own the file format; this type owns validation, cross-field resolution,
//! and a content digest that identifies the exact parameterization of a
//! run.

use crate::adoption::AdoptionParams;
use crate::error::ConfigError;
use crate::mobility::CommuteCalendar;
use crate::population::{CogencyDist, PopulationSpec};
use crate::tariff::{EnergyModel, TariffPolicy};

/// Complete, validated parameterization of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub population: PopulationSpec,
    pub calendar: CommuteCalendar,
    pub lot_capacity: u32,
    pub tariff: TariffPolicy,
    pub energy: EnergyModel,
    pub adoption: AdoptionParams,
    pub horizon_days: u32,
    pub replications: u32,
    pub base_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            population: PopulationSpec::default(),
            calendar: CommuteCalendar::default(),
            lot_capacity: 600,
            tariff: TariffPolicy::default(),
            energy: EnergyModel::default(),
            adoption: AdoptionParams::default(),
            horizon_days: 3652, // ten years
            replications: 1,
            base_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.population.validate()?;
        self.calendar.validate()?;
        // The tariff is validated on construction; re-check here so hand
        // built configs cannot smuggle in a mutated table.
        TariffPolicy::new(
            *self.tariff.table(),
            self.tariff.ev_strategy.clone(),
            self.tariff.accrual_workdays_per_year,
        )?;
        self.energy.validate()?;
        self.adoption.validate()?;
        if self.replications == 0 {
            return Err(ConfigError::new("run.replications", "must be at least 1"));
        }
        Ok(())
    }

    /// Resolves cross-module defaults: a population whose cogency follows
    /// the scenario's adoption fraction gets that value pinned in, so
    /// sweeps over `adoption.adoption_fraction` propagate to cogency.
    pub fn resolve(&self) -> ScenarioConfig {
        let mut resolved = self.clone();
        if resolved.population.cogency == CogencyDist::AdoptionFraction {
            resolved.population.cogency =
                CogencyDist::Constant(resolved.adoption.adoption_fraction);
        }
        resolved
    }

    /// Content hash of the resolved configuration: equal digests mean
    /// bit-identical parameterizations. FNV-1a over a fixed-order binary
    /// encoding of every field.
    pub fn digest(&self) -> u64 {
        let resolved = self.resolve();
        let mut h = Fnv1a::new();

        let p = &resolved.population;
        h.u32(p.stereotypes.len() as u32);
        for s in &p.stereotypes {
            h.u32(s.id as u32);
            h.f64(s.share);
            h.f64(s.ea_low);
            h.f64(s.ea_high);
            h.f64(s.buy_probability);
        }
        h.u32(p.n_agents);
        for w in p.staff_level_weights {
            h.f64(w);
        }
        for w in p.fleet_category_weights {
            h.f64(w);
        }
        match p.cogency {
            CogencyDist::AdoptionFraction => h.u32(0),
            CogencyDist::Constant(c) => {
                h.u32(1);
                h.f64(c);
            }
            CogencyDist::Uniform { lo, hi } => {
                h.u32(2);
                h.f64(lo);
                h.f64(hi);
            }
        }

        let c = &resolved.calendar;
        h.u32(c.depart_home_min);
        h.u32(c.travel_min);
        h.u32(c.depart_work_min);
        for day in crate::mobility::Weekday::ALL {
            h.u32(c.workdays.contains(day) as u32);
        }

        h.u32(resolved.lot_capacity);

        let t = &resolved.tariff;
        for row in t.table() {
            for &charge in row {
                h.f64(charge);
            }
        }
        match &t.ev_strategy {
            crate::tariff::EvStrategy::SameAsCategoryA => h.u32(0),
            crate::tariff::EvStrategy::Multiplier(m) => {
                h.u32(1);
                h.f64(*m);
            }
            crate::tariff::EvStrategy::FlatTable(charges) => {
                h.u32(2);
                for &charge in charges {
                    h.f64(charge);
                }
            }
        }
        h.u32(t.accrual_workdays_per_year);

        let e = &resolved.energy;
        for i in e.intensity_by_category {
            h.f64(i);
        }
        h.f64(e.round_trip_km);
        h.f64(e.ev_intensity);

        let a = &resolved.adoption;
        h.f64(a.ad_rate);
        h.f64(a.contact_rate);
        h.f64(a.adoption_fraction);
        h.f64(a.awareness_threshold);
        h.f64(a.incentive_beta);
        h.f64(a.subsidy_fraction);
        h.f64(a.subsidy_cap);
        h.f64(a.ev_price);
        for s in a.salary_by_level {
            h.f64(s);
        }

        h.u32(resolved.horizon_days);
        h.u32(resolved.replications);
        h.u64(resolved.base_seed);

        h.finish()
    }
}

/// Minimal FNV-1a 64-bit accumulator.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xCBF2_9CE4_8422_2325)
    }

    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_bits().to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
