//! Property tests for the structural invariants.

use proptest::prelude::*;
use rand::SeedableRng;

use evpark_core::adoption::{decide_purchase, AdoptionParams, PurchaseTrigger, TriggerKind};
use evpark_core::population::{
    eligible_fraction, quota_counts, sample_population, CarOwner, CogencyDist, CommuteState,
    PopulationSpec, StereotypeSpec,
};
use evpark_core::rng::SimRng;
use evpark_core::tariff::{EmissionsCategory, StaffLevel, TariffPolicy, Vehicle};
use evpark_core::{run, ScenarioConfig};

/// A random stereotype list with shares renormalized onto the simplex.
fn arb_stereotypes() -> impl Strategy<Value = Vec<StereotypeSpec>> {
    proptest::collection::vec((1.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0, 0.0f64..=1.0), 1..6)
        .prop_map(|raw| {
            let total: f64 = raw.iter().map(|(w, _, _, _)| w).sum();
            raw.into_iter()
                .enumerate()
                .map(|(i, (w, a, b, p))| StereotypeSpec {
                    id: i as u8 + 1,
                    share: w / total,
                    ea_low: a.min(b),
                    ea_high: a.max(b),
                    buy_probability: p,
                })
                .collect()
        })
}

fn spec_from(stereotypes: Vec<StereotypeSpec>, n_agents: u32) -> PopulationSpec {
    PopulationSpec {
        stereotypes,
        n_agents,
        cogency: CogencyDist::Constant(0.5),
        ..PopulationSpec::default()
    }
}

proptest! {
    #[test]
    fn quota_counts_sum_and_stay_within_one(
        stereotypes in arb_stereotypes(),
        n in 0u32..5000,
    ) {
        let shares: Vec<f64> = stereotypes.iter().map(|s| s.share).collect();
        let counts = quota_counts(&shares, n);
        prop_assert_eq!(counts.iter().sum::<u32>(), n);
        for (count, share) in counts.iter().zip(&shares) {
            let quota = share * n as f64;
            prop_assert!((*count as f64 - quota).abs() < 1.0,
                "count {} vs quota {}", count, quota);
        }
    }

    #[test]
    fn eligible_fraction_is_non_increasing(
        stereotypes in arb_stereotypes(),
        t1 in 0.0f64..=100.0,
        t2 in 0.0f64..=100.0,
    ) {
        let spec = spec_from(stereotypes, 10);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(eligible_fraction(&spec, lo) >= eligible_fraction(&spec, hi));
    }

    #[test]
    fn sampling_is_reproducible_and_respects_ranges(
        stereotypes in arb_stereotypes(),
        n in 0u32..400,
        seed in any::<u64>(),
    ) {
        let spec = spec_from(stereotypes.clone(), n);
        let a = sample_population(&spec, &mut SimRng::seed_from_u64(seed)).unwrap();
        let b = sample_population(&spec, &mut SimRng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), n as usize);
        for agent in &a {
            let s = stereotypes.iter().find(|s| s.id == agent.stereotype_id).unwrap();
            prop_assert!(agent.energy_awareness >= s.ea_low);
            prop_assert!(agent.energy_awareness <= s.ea_high);
        }
    }

    #[test]
    fn closed_awareness_gate_never_adopts(
        awareness in 0.0f64..=50.0,
        buy_probability in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        // Awareness at or below the threshold fails the strict gate no
        // matter what the draws say.
        let params = AdoptionParams { awareness_threshold: 50.0, ..AdoptionParams::default() };
        let policy = TariffPolicy::default();
        let stereotype = StereotypeSpec {
            id: 1, share: 1.0, ea_low: 0.0, ea_high: 100.0, buy_probability,
        };
        let mut owner = CarOwner {
            id: 0,
            stereotype_id: 1,
            energy_awareness: awareness,
            staff_level: StaffLevel::new(3).unwrap(),
            vehicle: Vehicle::Conventional(EmissionsCategory::C),
            cogency: 1.0,
            commute_state: CommuteState::AtHome,
            adopted_at: None,
        };
        let mut rng = SimRng::seed_from_u64(seed);
        let trigger = PurchaseTrigger { kind: TriggerKind::Ad, day: 3 };
        let adopted = decide_purchase(
            &mut owner, &trigger, None, &stereotype, &policy, &params, &mut rng,
        ).unwrap();
        prop_assert!(!adopted);
        prop_assert!(owner.adopted_at.is_none());
    }
}

proptest! {
    // Whole-run properties are costlier; keep the case count modest.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_runs_are_deterministic_and_monotone(
        n_agents in 1u32..30,
        capacity in 1u32..40,
        horizon in 1u32..40,
        ad_rate in 0.0f64..20.0,
        contact_rate in 0.0f64..300.0,
        fraction in 0.0f64..=1.0,
        threshold in 0.0f64..=100.0,
        seed in any::<u64>(),
    ) {
        let mut scenario = ScenarioConfig::default();
        scenario.population.n_agents = n_agents;
        scenario.lot_capacity = capacity;
        scenario.horizon_days = horizon;
        scenario.adoption.ad_rate = ad_rate;
        scenario.adoption.contact_rate = contact_rate;
        scenario.adoption.adoption_fraction = fraction;
        scenario.adoption.awareness_threshold = threshold;

        let a = run(&scenario, seed).unwrap();
        let b = run(&scenario, seed).unwrap();
        prop_assert_eq!(&a, &b);

        a.series.check_invariants().unwrap();
        prop_assert_eq!(a.series.len(), horizon as usize);
        prop_assert_eq!(
            a.final_ev_count,
            a.series.records.last().unwrap().ev_count
        );
        for record in &a.series.records {
            prop_assert!(record.peak_occupancy <= capacity);
            prop_assert!(record.peak_occupancy + record.rejections <= n_agents);
        }
    }
}
