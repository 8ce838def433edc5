//! Built-in experiment presets.
//!
//! Both presets share the canonical campus setup: 600 parking spaces, 500
//! staff, awareness threshold 50, a ten-year horizon, and 100 replications
//! per arm.
//!
//! * `exp1` compares parking-charge strategies: it makes the purchase
//!   decision price-sensitive and sweeps the EV charge multiplier over
//!   1.0 (EVs pay the full category-A rate), 0.5, and 0.0 (free EV
//!   parking).
//! * `exp2` isolates word of mouth: incentives off, sweeping the adoption
//!   fraction (contact cogency) over 0, 0.02, and 0.05.

use evpark_core::ScenarioConfig;

/// A parameter sweep: one batch per value of `key`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

/// A ready-to-run experiment: base scenario plus optional sweep.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: ScenarioConfig,
    pub sweep: Option<Sweep>,
}

/// Price sensitivity used by `exp1`. The base model leaves incentives off;
/// the charge-comparison experiment needs the purchase decision to feel
/// the annual saving, and this weight makes a fully waived category-A
/// charge worth roughly a 12-25% boost to buy probability depending on
/// salary.
pub const EXP1_INCENTIVE_BETA: f64 = 100.0;

fn campus_base() -> ScenarioConfig {
    let mut scenario = ScenarioConfig::default();
    scenario.population.n_agents = 500;
    scenario.lot_capacity = 600;
    scenario.adoption.awareness_threshold = 50.0;
    scenario.horizon_days = 3652;
    scenario.replications = 100;
    scenario
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "exp1" => {
            let mut scenario = campus_base();
            scenario.adoption.incentive_beta = EXP1_INCENTIVE_BETA;
            Some(Preset {
                name: "exp1",
                scenario,
                sweep: Some(Sweep {
                    key: "tariff.ev_strategy".into(),
                    values: vec![
                        "multiplier:1".into(),
                        "multiplier:0.5".into(),
                        "multiplier:0".into(),
                    ],
                }),
            })
        }
        "exp2" => Some(Preset {
            name: "exp2",
            scenario: campus_base(),
            sweep: Some(Sweep {
                key: "adoption.adoption_fraction".into(),
                values: vec!["0".into(), "0.02".into(), "0.05".into()],
            }),
        }),
        _ => None,
    }
}
