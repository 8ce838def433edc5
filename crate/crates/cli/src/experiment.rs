//! Batch execution and CSV emission.
//!
//! One experiment = one replication batch per sweep arm (or a single batch
//! without a sweep). Every batch writes per-replication series files, an
//! aggregate file, and rows into a shared summary; a `manifest` file lists
//! everything with its scenario digest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use evpark_core::engine::{run_replications, DayAggregate, ReplicationSet};
use evpark_core::population::CogencyDist;
use evpark_core::validation::{bass_closed_form, bass_ode_days, BassParams};
use evpark_core::{RunResult, ScenarioConfig};

use crate::presets::Sweep;
use crate::{apply_override, CliError};

pub const SERIES_HEADER: &str =
    "day,ev_count,new_adopters,revenue,energy_proxy,peak_occupancy,rejections";

/// Tolerance of the reduced-mode cross-validation, as a fraction of the
/// market size.
pub const BASS_TOLERANCE_FRACTION: f64 = 0.05;

/// One executed sweep arm.
#[derive(Debug)]
pub struct ArmReport {
    /// The swept value, if any.
    pub value: Option<String>,
    pub digest: u64,
    pub final_ev_mean: f64,
    pub final_ev_std: f64,
    pub replications: u32,
}

/// Everything an experiment produced.
#[derive(Debug)]
pub struct ExperimentReport {
    pub arms: Vec<ArmReport>,
    pub files: Vec<PathBuf>,
    pub out_dir: PathBuf,
}

fn digest_hex(digest: u64) -> String {
    format!("{digest:016x}")
}

/// Keeps sweep values readable inside file names.
fn sanitize(value: &str) -> String {
    value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn format_f64(v: f64) -> String {
    // Shortest round-trip formatting keeps the CSV bit-faithful to the run.
    v.to_string()
}

fn series_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(result.series.len() * 48 + 64);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in &result.series.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.day,
            r.ev_count,
            r.new_adopters,
            format_f64(r.revenue),
            format_f64(r.energy_proxy),
            r.peak_occupancy,
            r.rejections
        );
    }
    out
}

fn aggregate_csv(aggregate: &[DayAggregate]) -> String {
    let mut out = String::with_capacity(aggregate.len() * 96 + 192);
    out.push_str("day");
    for metric in [
        "ev_count",
        "new_adopters",
        "revenue",
        "energy_proxy",
        "peak_occupancy",
        "rejections",
    ] {
        let _ = write!(out, ",{metric}_mean,{metric}_std");
    }
    out.push('\n');
    for d in aggregate {
        let cols = [
            d.ev_count,
            d.new_adopters,
            d.revenue,
            d.energy_proxy,
            d.peak_occupancy,
            d.rejections,
        ];
        let _ = write!(out, "{}", d.day);
        for c in cols {
            let _ = write!(out, ",{},{}", format_f64(c.mean), format_f64(c.std));
        }
        out.push('\n');
    }
    out
}

struct OutputSet {
    out_dir: PathBuf,
    files: Vec<PathBuf>,
    summary: String,
    manifest: String,
}

impl OutputSet {
    fn new(out_dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)?;
        Ok(OutputSet {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
            summary: "sweep_key,sweep_value,scenario_digest,replication,seed,final_ev_count\n"
                .to_string(),
            manifest: String::new(),
        })
    }

    fn write_file(
        &mut self,
        name: &str,
        contents: &str,
        digest: u64,
        arm: Option<(&str, &str)>,
    ) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)?;
        let arm_note = match arm {
            Some((key, value)) => format!("{key}={value}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            self.manifest,
            "{name}\tdigest={}\tarm={arm_note}",
            digest_hex(digest)
        );
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, arms: Vec<ArmReport>) -> Result<ExperimentReport, CliError> {
        let summary = std::mem::take(&mut self.summary);
        let summary_digest = arms.first().map(|a| a.digest).unwrap_or(0);
        self.write_file("summary.csv", &summary, summary_digest, None)?;
        let manifest_path = self.out_dir.join("manifest");
        fs::write(&manifest_path, &self.manifest)?;
        self.files.push(manifest_path);
        Ok(ExperimentReport {
            arms,
            files: self.files,
            out_dir: self.out_dir,
        })
    }
}

fn run_arm(
    out: &mut OutputSet,
    scenario: &ScenarioConfig,
    sweep_arm: Option<(&str, &str)>,
) -> Result<(ArmReport, ReplicationSet), CliError> {
    let batch = run_replications(scenario, scenario.base_seed, scenario.replications)?;
    let digest = scenario.digest();
    let tag = match sweep_arm {
        Some((_, value)) => format!("{}_{}", digest_hex(digest), sanitize(value)),
        None => digest_hex(digest),
    };

    for (rep, result) in batch.runs.iter().enumerate() {
        let name = format!("series_{tag}_rep{rep:03}.csv");
        out.write_file(&name, &series_csv(result), digest, sweep_arm)?;
        let (key, value) = sweep_arm.unwrap_or(("-", "-"));
        let _ = writeln!(
            out.summary,
            "{key},{value},{},{rep},{},{}",
            digest_hex(digest),
            result.seed,
            result.final_ev_count
        );
    }
    let name = format!("aggregate_{tag}.csv");
    out.write_file(&name, &aggregate_csv(&batch.aggregate), digest, sweep_arm)?;

    let report = ArmReport {
        value: sweep_arm.map(|(_, v)| v.to_string()),
        digest,
        final_ev_mean: batch.final_ev.mean,
        final_ev_std: batch.final_ev.std,
        replications: scenario.replications,
    };
    Ok((report, batch))
}

/// Runs the experiment described by `scenario` (+ optional sweep) and
/// writes all CSV outputs under `out_dir`.
pub fn run_experiment(
    scenario: &ScenarioConfig,
    sweep: Option<&Sweep>,
    out_dir: &Path,
) -> Result<ExperimentReport, CliError> {
    let mut out = OutputSet::new(out_dir)?;
    let mut arms = Vec::new();
    match sweep {
        None => {
            let (report, _) = run_arm(&mut out, scenario, None)?;
            arms.push(report);
        }
        Some(sweep) => {
            for value in &sweep.values {
                let arm_scenario = apply_override(scenario, &sweep.key, value)?;
                let (report, _) =
                    run_arm(&mut out, &arm_scenario, Some((sweep.key.as_str(), value)))?;
                arms.push(report);
            }
        }
    }
    out.finish(arms)
}

/// Outcome of the reduced-mode system-dynamics comparison.
#[derive(Debug)]
pub struct BassReport {
    pub sup_deviation: f64,
    pub tolerance: f64,
    pub file: PathBuf,
}

impl BassReport {
    pub fn passed(&self) -> bool {
        self.sup_deviation <= self.tolerance
    }
}

/// Strips every decision gate out of a scenario so the agent model becomes
/// a pure mixed-influence diffusion: awareness gate open, buy probability
/// one for every stereotype, incentives off, cogency pinned to the
/// adoption fraction.
pub fn reduced_mode(scenario: &ScenarioConfig) -> ScenarioConfig {
    let mut reduced = scenario.clone();
    reduced.adoption.awareness_threshold = 0.0;
    reduced.adoption.incentive_beta = 0.0;
    reduced.population.cogency = CogencyDist::Constant(reduced.adoption.adoption_fraction);
    for stereotype in &mut reduced.population.stereotypes {
        stereotype.buy_probability = 1.0;
    }
    reduced
}

/// Runs the reduced-mode agent model against the diffusion oracle
/// (`p = ad_rate`, `q = contact_rate * adoption_fraction`) and emits both
/// trajectories plus their absolute gap as CSV.
pub fn validate_bass(scenario: &ScenarioConfig, out_dir: &Path) -> Result<BassReport, CliError> {
    let reduced = reduced_mode(scenario);
    let batch = run_replications(&reduced, reduced.base_seed, reduced.replications)?;
    let abm_mean: Vec<f64> = batch.aggregate.iter().map(|d| d.ev_count.mean).collect();

    let n_total = reduced.population.n_agents as f64;
    let params = BassParams {
        p: reduced.adoption.ad_rate,
        q: reduced.adoption.contact_rate * reduced.adoption.adoption_fraction,
        n_total,
        horizon_years: reduced.horizon_days as f64 / 365.25,
        dt: 1e-3,
    };
    // The closed form is the reference when defined; a zero innovation
    // rate falls back to the RK4 trajectory (identically zero from A0=0).
    let oracle: Vec<f64> = if params.p > 0.0 {
        (0..abm_mean.len())
            .map(|d| bass_closed_form(&params, (d as f64 + 1.0) / 365.25).expect("p > 0"))
            .collect()
    } else {
        bass_ode_days(&params, abm_mean.len())
    };

    let sup_deviation = evpark_core::validation::compare_abm_to_sd(&abm_mean, &oracle)
        .map_err(evpark_core::RunError::Config)?;

    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("day,abm_mean_ev,sd_oracle,abs_deviation\n");
    for (d, (abm, sd)) in abm_mean.iter().zip(&oracle).enumerate() {
        let _ = writeln!(
            csv,
            "{d},{},{},{}",
            format_f64(*abm),
            format_f64(*sd),
            format_f64((abm - sd).abs())
        );
    }
    let file = out_dir.join(format!(
        "bass_validation_{}.csv",
        digest_hex(reduced.digest())
    ));
    fs::write(&file, csv)?;

    Ok(BassReport {
        sup_deviation,
        tolerance: BASS_TOLERANCE_FRACTION * n_total,
        file,
    })
}
