//! Deterministic discrete-event core.
//!
//! One run owns a clock in integer minutes, a priority queue of events, a
//! single seeded random stream, and all mutable model state. Events execute
//! in `(time, kind priority, insertion order)` order with the fixed kind
//! priority Commute < WomDelivery < AdExposure < MetricsTick, which makes a
//! run a pure function of `(scenario, seed)`.
//!
//! Scheduling is day-grained: the metrics tick at 23:59 records the day's
//! figures and lays out the next day (commute phases, the day's
//! word-of-mouth contacts, the next tick). Ad exposures are a per-agent
//! Poisson process scheduled exposure-to-exposure. All agents share one
//! commute calendar, so a commute phase is a single event that walks the
//! population in id order; per-agent events ordered by id would execute
//! identically and cost far more queue traffic.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};

use crate::adoption::{
    decide_purchase, next_ad_exposure, ContactProcess, PurchaseTrigger, TriggerKind,
};
use crate::error::{ConfigError, ProtocolError, RunError};
use crate::mobility::{CommuteTransition, ParkingLot, SpaceRequest, MINUTES_PER_DAY};
use crate::population::{sample_population, CarOwner, StereotypeSpec};
use crate::rng::{replication_seed, SimRng};
use crate::scenario::ScenarioConfig;
use crate::tariff::{accrue_day, CommuterDay};

/// Event kinds in execution-priority order (lower runs first at equal
/// times).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventPayload {
    /// One commute phase applied to the whole population in id order.
    Commute(CommuteTransition),
    /// A "buy" message from `source` arriving at `target`.
    WomDelivery { source: u32, target: u32 },
    /// The next ad exposure of `owner`.
    AdExposure { owner: u32 },
    /// End-of-day bookkeeping for `day`.
    MetricsTick { day: u32 },
}

impl EventPayload {
    fn priority(&self) -> u8 {
        match self {
            EventPayload::Commute(_) => 0,
            EventPayload::WomDelivery { .. } => 1,
            EventPayload::AdExposure { .. } => 2,
            EventPayload::MetricsTick { .. } => 3,
        }
    }
}

/// A scheduled event. Orders by `(time, kind priority, seq)`.
#[derive(Debug, Clone, Copy)]
pub struct SimEvent {
    pub time: u64,
    pub seq: u64,
    pub payload: EventPayload,
}

impl SimEvent {
    fn key(&self) -> (u64, u8, u64) {
        (self.time, self.payload.priority(), self.seq)
    }
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for earliest-first.
        self.key().cmp(&other.key()).reverse()
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One day of recorded metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    pub day: u32,
    pub ev_count: u32,
    pub new_adopters: u32,
    pub revenue: f64,
    pub energy_proxy: f64,
    pub peak_occupancy: u32,
    pub rejections: u32,
}

/// Per-day time series for one run; day indices are contiguous from 0 and
/// `ev_count` is non-decreasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsSeries {
    pub records: Vec<DayRecord>,
}

impl MetricsSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks the series' structural invariants.
    pub fn check_invariants(&self) -> Result<(), ProtocolError> {
        let mut prev_ev = 0u32;
        for (i, r) in self.records.iter().enumerate() {
            if r.day != i as u32 {
                return Err(ProtocolError::new("day indices must be contiguous from 0"));
            }
            if r.ev_count < prev_ev {
                return Err(ProtocolError::new("ev_count must be non-decreasing"));
            }
            prev_ev = r.ev_count;
        }
        Ok(())
    }
}

/// The outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub series: MetricsSeries,
    pub final_ev_count: u32,
    pub seed: u64,
    /// Digest of the resolved scenario this run executed.
    pub scenario_digest: u64,
}

/// Runs one simulation. Fully deterministic in `(scenario, seed)`.
pub fn run(scenario: &ScenarioConfig, seed: u64) -> Result<RunResult, RunError> {
    scenario.validate()?;
    let resolved = scenario.resolve();
    let digest = resolved.digest();
    let mut rng = SimRng::seed_from_u64(seed);
    let agents = sample_population(&resolved.population, &mut rng)?;

    let mut engine = Engine::new(&resolved, agents, rng);
    if resolved.horizon_days > 0 {
        engine.init_ad_processes();
        engine.schedule_day(0);
        engine.drain()?;
    }

    let series = MetricsSeries {
        records: engine.records,
    };
    let final_ev_count = engine.ev_count;
    Ok(RunResult {
        series,
        final_ev_count,
        seed,
        scenario_digest: digest,
    })
}

struct Engine<'a> {
    scenario: &'a ScenarioConfig,
    stereotypes: BTreeMap<u8, StereotypeSpec>,
    agents: Vec<CarOwner>,
    lot: ParkingLot,
    rng: SimRng,
    queue: BinaryHeap<SimEvent>,
    next_seq: u64,
    clock: u64,
    horizon_end: u64,
    contacts: ContactProcess,
    contact_buf: Vec<u32>,
    ev_count: u32,
    at_work: u32,
    rejected_active: u32,
    adoptions_today: u32,
    rejections_today: u32,
    peak_occupancy_today: u32,
    day_commuters: Vec<CommuterDay>,
    records: Vec<DayRecord>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a ScenarioConfig, agents: Vec<CarOwner>, rng: SimRng) -> Self {
        let stereotypes = scenario
            .population
            .stereotypes
            .iter()
            .map(|s| (s.id, s.clone()))
            .collect();
        let n = agents.len();
        Engine {
            scenario,
            stereotypes,
            contacts: ContactProcess::new(&scenario.adoption, n as u32),
            contact_buf: Vec::new(),
            agents,
            lot: ParkingLot::new(scenario.lot_capacity),
            rng,
            queue: BinaryHeap::new(),
            next_seq: 0,
            clock: 0,
            horizon_end: scenario.horizon_days as u64 * MINUTES_PER_DAY as u64,
            ev_count: 0,
            at_work: 0,
            rejected_active: 0,
            adoptions_today: 0,
            rejections_today: 0,
            peak_occupancy_today: 0,
            day_commuters: Vec::with_capacity(n),
            // Grows on demand past this; absurd horizons should not bloat
            // the allocation up front.
            records: Vec::with_capacity((scenario.horizon_days as usize).min(1 << 20)),
        }
    }

    fn push(&mut self, time: u64, payload: EventPayload) {
        if time >= self.horizon_end {
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(SimEvent { time, seq, payload });
    }

    /// First ad exposure for every agent, in id order.
    fn init_ad_processes(&mut self) {
        for id in 0..self.agents.len() as u32 {
            if let Some(time) = self.draw_ad_time(0) {
                self.push(time, EventPayload::AdExposure { owner: id });
            }
        }
    }

    fn draw_ad_time(&mut self, from: u64) -> Option<u64> {
        let gap_days = next_ad_exposure(&self.scenario.adoption, &mut self.rng)?;
        let gap_min = libm::ceil(gap_days * MINUTES_PER_DAY as f64);
        // Positive rates give strictly positive gaps; the cast saturates
        // for absurdly small rates instead of overflowing.
        let gap_min = (gap_min as u64).max(1);
        Some(from.saturating_add(gap_min))
    }

    /// Lays out one day: commute phases, the day's word-of-mouth contacts
    /// (drawn for the adopters existing now, everyone at home), and the
    /// closing metrics tick.
    fn schedule_day(&mut self, day: u32) {
        let base = day as u64 * MINUTES_PER_DAY as u64;
        if let Some(times) = self.scenario.calendar.phase_times(day) {
            for (transition, time) in CommuteTransition::ALL.into_iter().zip(times) {
                self.push(time, EventPayload::Commute(transition));
            }
        }

        let n_agents = self.agents.len() as u32;
        let eligible = self.scenario.calendar.eligible_minutes(day);
        let mut buf = core::mem::take(&mut self.contact_buf);
        for source in 0..n_agents {
            if !self.agents[source as usize].vehicle.is_electric() {
                continue;
            }
            buf.clear();
            self.contacts.sample_into(source, &mut self.rng, &mut buf);
            for &target in &buf {
                let index = self.rng.gen_range(0..eligible);
                let minute = self.scenario.calendar.eligible_minute(day, index);
                self.push(
                    base + minute as u64,
                    EventPayload::WomDelivery { source, target },
                );
            }
        }
        self.contact_buf = buf;

        self.push(
            base + (MINUTES_PER_DAY - 1) as u64,
            EventPayload::MetricsTick { day },
        );
    }

    fn drain(&mut self) -> Result<(), RunError> {
        while let Some(event) = self.queue.pop() {
            if event.time < self.clock {
                return Err(ProtocolError::new("event scheduled in the past")
                    .at(event.time)
                    .into());
            }
            self.clock = event.time;
            match event.payload {
                EventPayload::Commute(transition) => self.handle_commute(transition)?,
                EventPayload::WomDelivery { source, target } => {
                    self.handle_wom_delivery(source, target)?
                }
                EventPayload::AdExposure { owner } => self.handle_ad_exposure(owner)?,
                EventPayload::MetricsTick { day } => self.handle_metrics_tick(day)?,
            }
        }
        Ok(())
    }

    fn handle_commute(&mut self, transition: CommuteTransition) -> Result<(), RunError> {
        let clock = self.clock;
        for id in 0..self.agents.len() {
            let state = self.agents[id].commute_state;
            if state != transition.from_state() {
                return Err(ProtocolError::for_agent(
                    id as u32,
                    alloc::format!(
                        "commute transition {transition:?} from unexpected state {state:?}"
                    ),
                )
                .at(clock)
                .into());
            }
            self.agents[id].commute_state = transition.to_state();
            match transition {
                CommuteTransition::ArriveWork => {
                    self.at_work += 1;
                    let parked = match self
                        .lot
                        .request_space(id as u32)
                        .map_err(|e| RunError::Protocol(e.at(clock)))?
                    {
                        SpaceRequest::Assigned(_) => true,
                        SpaceRequest::Rejected => {
                            self.rejections_today += 1;
                            self.rejected_active += 1;
                            false
                        }
                    };
                    let agent = &self.agents[id];
                    self.day_commuters.push(CommuterDay {
                        vehicle: agent.vehicle,
                        level: agent.staff_level,
                        parked,
                    });
                }
                CommuteTransition::DepartWork => {
                    self.at_work -= 1;
                    if self.lot.space_held_by(id as u32).is_some() {
                        self.lot
                            .release_space(id as u32)
                            .map_err(|e| RunError::Protocol(e.at(clock)))?;
                    } else {
                        // A rejected agent drives off without a space.
                        self.rejected_active -= 1;
                    }
                }
                CommuteTransition::DepartHome | CommuteTransition::ArriveHome => {}
            }
        }
        self.peak_occupancy_today = self.peak_occupancy_today.max(self.lot.occupied_count());
        self.check_occupancy_conservation()
    }

    fn handle_wom_delivery(&mut self, source: u32, target: u32) -> Result<(), RunError> {
        debug_assert!(self.agents[source as usize].vehicle.is_electric());
        if self.agents[target as usize].vehicle.is_electric() {
            // Contacts land on already-converted agents too; they carry no
            // decision.
            return Ok(());
        }
        let source_cogency = self.agents[source as usize].cogency;
        let trigger = PurchaseTrigger {
            kind: TriggerKind::Wom { source },
            day: (self.clock / MINUTES_PER_DAY as u64) as u32,
        };
        self.deliver_trigger(target, trigger, Some(source_cogency))
    }

    fn handle_ad_exposure(&mut self, owner: u32) -> Result<(), RunError> {
        if self.agents[owner as usize].vehicle.is_electric() {
            // Stale exposure scheduled before adoption; the ad process for
            // this agent ends here.
            return Ok(());
        }
        let trigger = PurchaseTrigger {
            kind: TriggerKind::Ad,
            day: (self.clock / MINUTES_PER_DAY as u64) as u32,
        };
        self.deliver_trigger(owner, trigger, None)?;
        if !self.agents[owner as usize].vehicle.is_electric() {
            if let Some(time) = self.draw_ad_time(self.clock) {
                self.push(time, EventPayload::AdExposure { owner });
            }
        }
        Ok(())
    }

    fn deliver_trigger(
        &mut self,
        target: u32,
        trigger: PurchaseTrigger,
        source_cogency: Option<f64>,
    ) -> Result<(), RunError> {
        let clock = self.clock;
        let stereotype_id = self.agents[target as usize].stereotype_id;
        let stereotype = self
            .stereotypes
            .get(&stereotype_id)
            .cloned()
            .ok_or_else(|| {
                RunError::Protocol(
                    ProtocolError::for_agent(target, "agent with unknown stereotype").at(clock),
                )
            })?;
        let adopted = decide_purchase(
            &mut self.agents[target as usize],
            &trigger,
            source_cogency,
            &stereotype,
            &self.scenario.tariff,
            &self.scenario.adoption,
            &mut self.rng,
        )
        .map_err(|e| RunError::Protocol(e.at(clock)))?;
        if adopted {
            self.ev_count += 1;
            self.adoptions_today += 1;
        }
        Ok(())
    }

    fn handle_metrics_tick(&mut self, day: u32) -> Result<(), RunError> {
        self.lot
            .audit()
            .map_err(|e| RunError::Protocol(e.at(self.clock)))?;
        self.check_occupancy_conservation()?;

        let accrual = accrue_day(&self.day_commuters, &self.scenario.tariff, &self.scenario.energy);
        self.records.push(DayRecord {
            day,
            ev_count: self.ev_count,
            new_adopters: self.adoptions_today,
            revenue: accrual.revenue,
            energy_proxy: accrual.energy_grams,
            peak_occupancy: self.peak_occupancy_today,
            rejections: self.rejections_today,
        });

        self.day_commuters.clear();
        self.adoptions_today = 0;
        self.rejections_today = 0;
        self.peak_occupancy_today = 0;

        if day + 1 < self.scenario.horizon_days {
            self.schedule_day(day + 1);
        }
        Ok(())
    }

    /// Occupied spaces must equal agents at work minus those turned away.
    fn check_occupancy_conservation(&self) -> Result<(), RunError> {
        let expected = self.at_work - self.rejected_active;
        if self.lot.occupied_count() != expected {
            return Err(ProtocolError::new(alloc::format!(
                "occupancy {} but {} agents at work hold spaces",
                self.lot.occupied_count(),
                expected
            ))
            .at(self.clock)
            .into());
        }
        Ok(())
    }
}

/// Per-day mean and sample standard deviation of one metric across
/// replications.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> MeanStd {
    let n = values.clone().count();
    if n == 0 {
        return MeanStd::default();
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanStd { mean, std: 0.0 };
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    MeanStd {
        mean,
        std: libm::sqrt(ss / (n - 1) as f64),
    }
}

/// Cross-replication aggregate for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayAggregate {
    pub day: u32,
    pub ev_count: MeanStd,
    pub new_adopters: MeanStd,
    pub revenue: MeanStd,
    pub energy_proxy: MeanStd,
    pub peak_occupancy: MeanStd,
    pub rejections: MeanStd,
}

/// A batch of independent replications plus exact aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSet {
    pub runs: Vec<RunResult>,
    pub aggregate: Vec<DayAggregate>,
    pub final_ev: MeanStd,
}

/// Runs `n_reps` independent replications of `scenario`.
///
/// Replication `r` is seeded with [`replication_seed`]`(base_seed, r)`, a
/// pure function of the pair, so the batch is reproducible and its
/// aggregates do not depend on execution order.
pub fn run_replications(
    scenario: &ScenarioConfig,
    base_seed: u64,
    n_reps: u32,
) -> Result<ReplicationSet, RunError> {
    if n_reps == 0 {
        return Err(ConfigError::new("run.replications", "must be at least 1").into());
    }
    let mut runs = Vec::with_capacity(n_reps as usize);
    for rep in 0..n_reps {
        runs.push(run(scenario, replication_seed(base_seed, rep))?);
    }
    Ok(aggregate_runs(runs))
}

/// Builds the exact per-day aggregates over already-completed runs.
///
/// Summation happens in seed order, not supply order, so aggregates are
/// bit-identical however the runs were produced or collected.
pub fn aggregate_runs(runs: Vec<RunResult>) -> ReplicationSet {
    let mut by_seed: Vec<&RunResult> = runs.iter().collect();
    by_seed.sort_by_key(|r| r.seed);
    let days = runs.first().map(|r| r.series.len()).unwrap_or(0);
    let aggregate = (0..days)
        .map(|d| {
            let by_seed = &by_seed;
            let rec = move |f: fn(&DayRecord) -> f64| {
                mean_std(by_seed.iter().map(move |r| f(&r.series.records[d])))
            };
            DayAggregate {
                day: d as u32,
                ev_count: rec(|r| r.ev_count as f64),
                new_adopters: rec(|r| r.new_adopters as f64),
                revenue: rec(|r| r.revenue),
                energy_proxy: rec(|r| r.energy_proxy),
                peak_occupancy: rec(|r| r.peak_occupancy as f64),
                rejections: rec(|r| r.rejections as f64),
            }
        })
        .collect();
    let final_ev = mean_std(by_seed.iter().map(|r| r.final_ev_count as f64));
    drop(by_seed);
    ReplicationSet {
        runs,
        aggregate,
        final_ev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::CogencyDist;

    fn small_scenario() -> ScenarioConfig {
        let mut s = ScenarioConfig::default();
        s.population.n_agents = 40;
        s.lot_capacity = 50;
        s.horizon_days = 60;
        s.adoption.awareness_threshold = 0.0;
        s
    }

    #[test]
    fn zero_horizon_gives_empty_series() {
        let s = ScenarioConfig {
            horizon_days: 0,
            ..ScenarioConfig::default()
        };
        let result = run(&s, 1).unwrap();
        assert!(result.series.is_empty());
        assert_eq!(result.final_ev_count, 0);
    }

    #[test]
    fn identical_seed_gives_identical_result() {
        let s = small_scenario();
        let a = run(&s, 99).unwrap();
        let b = run(&s, 99).unwrap();
        assert_eq!(a, b);
        let c = run(&s, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn closed_gate_means_no_adoption() {
        let mut s = small_scenario();
        s.adoption.awareness_threshold = 100.0;
        s.adoption.ad_rate = 50.0;
        s.adoption.contact_rate = 500.0;
        let result = run(&s, 5).unwrap();
        assert_eq!(result.final_ev_count, 0);
        assert!(result.series.records.iter().all(|r| r.ev_count == 0));
    }

    #[test]
    fn series_invariants_hold() {
        let mut s = small_scenario();
        s.adoption.ad_rate = 2.0;
        let result = run(&s, 12).unwrap();
        result.series.check_invariants().unwrap();
        assert_eq!(result.series.len(), 60);
        assert_eq!(
            result.final_ev_count,
            result.series.records.last().unwrap().ev_count
        );
    }

    #[test]
    fn weekends_have_no_commuters() {
        let result = run(&small_scenario(), 3).unwrap();
        for r in &result.series.records {
            let weekday = crate::mobility::Weekday::of_day(r.day);
            let workday = crate::mobility::WeekdaySet::WEEKDAYS.contains(weekday);
            if workday {
                assert_eq!(r.peak_occupancy, 40);
                assert!(r.revenue > 0.0);
            } else {
                assert_eq!(r.peak_occupancy, 0);
                assert_eq!(r.revenue, 0.0);
                assert_eq!(r.energy_proxy, 0.0);
            }
            assert_eq!(r.rejections, 0);
        }
    }

    #[test]
    fn over_capacity_records_rejections_without_crashing() {
        let mut s = small_scenario();
        s.population.n_agents = 40;
        s.lot_capacity = 25;
        let result = run(&s, 8).unwrap();
        for r in &result.series.records {
            let workday = crate::mobility::WeekdaySet::WEEKDAYS
                .contains(crate::mobility::Weekday::of_day(r.day));
            if workday {
                assert_eq!(r.rejections, 15);
                assert_eq!(r.peak_occupancy, 25);
                assert!(r.energy_proxy > 0.0); // rejected agents still drove
            }
        }
    }

    #[test]
    fn single_replication_aggregate_equals_the_run() {
        let s = small_scenario();
        let set = run_replications(&s, 7, 1).unwrap();
        assert_eq!(set.runs.len(), 1);
        let only = &set.runs[0];
        assert_eq!(only.seed, replication_seed(7, 0));
        for (agg, rec) in set.aggregate.iter().zip(&only.series.records) {
            assert_eq!(agg.ev_count.mean, rec.ev_count as f64);
            assert_eq!(agg.ev_count.std, 0.0);
            assert_eq!(agg.revenue.mean, rec.revenue);
            assert_eq!(agg.revenue.std, 0.0);
        }
        assert_eq!(set.final_ev.mean, only.final_ev_count as f64);
        assert_eq!(set.final_ev.std, 0.0);
    }

    #[test]
    fn aggregates_do_not_depend_on_replication_order() {
        let mut s = small_scenario();
        s.adoption.ad_rate = 1.0;
        let set = run_replications(&s, 11, 4).unwrap();
        let mut shuffled = set.runs.clone();
        shuffled.reverse();
        let reaggregated = aggregate_runs(shuffled);
        assert_eq!(set.aggregate, reaggregated.aggregate);
        assert_eq!(set.final_ev, reaggregated.final_ev);
    }

    #[test]
    fn zero_replications_is_an_error() {
        assert!(matches!(
            run_replications(&small_scenario(), 0, 0),
            Err(RunError::Config(_))
        ));
    }

    #[test]
    fn cogency_follows_adoption_fraction_sweeps() {
        // Raising adoption_fraction with default cogency must change the
        // sampled population (cogency tracks it).
        let mut lo = small_scenario();
        lo.adoption.adoption_fraction = 0.0;
        let mut hi = small_scenario();
        hi.adoption.adoption_fraction = 0.9;
        assert_eq!(lo.population.cogency, CogencyDist::AdoptionFraction);
        assert_ne!(lo.digest(), hi.digest());
    }
}
