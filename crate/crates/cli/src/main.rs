use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use evpark::experiment::{run_experiment, validate_bass};
use evpark::presets::{preset, Sweep};
use evpark::{parse_scenario, CliError};
use evpark_core::ScenarioConfig;

/// Agent-based what-if simulator of electric-vehicle adoption in a
/// commuter population under parking-charge policies.
#[derive(Debug, Parser)]
#[command(name = "evpark", version, about)]
struct Args {
    /// Scenario file (line-oriented `section.key = value`).
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,

    /// Built-in experiment preset: `exp1` (parking-charge strategies) or
    /// `exp2` (word-of-mouth strength).
    #[arg(long)]
    preset: Option<String>,

    /// Sweep one scalar key over several values: `key=v1,v2,...`
    /// (overrides the preset's sweep).
    #[arg(long)]
    sweep: Option<String>,

    /// Base seed for the replication batch (overrides the scenario).
    #[arg(long)]
    seed: Option<u64>,

    /// Replications per sweep arm (overrides the scenario).
    #[arg(long)]
    replications: Option<u32>,

    /// Simulated horizon in days (overrides the scenario).
    #[arg(long)]
    horizon_days: Option<u32>,

    /// Output directory for CSV files and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Run the reduced-mode comparison against the system-dynamics
    /// diffusion oracle instead of the experiment.
    #[arg(long)]
    validate_bass: bool,
}

fn parse_sweep_flag(raw: &str) -> Result<Sweep> {
    let (key, values) = raw
        .split_once('=')
        .context("--sweep expects `key=v1,v2,...`")?;
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        bail!("--sweep needs at least one value");
    }
    Ok(Sweep {
        key: key.trim().to_string(),
        values,
    })
}

fn load_scenario(args: &Args) -> Result<(ScenarioConfig, Option<Sweep>)> {
    let (mut scenario, mut sweep) = if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let config = parse_scenario(&text)
            .map_err(CliError::Scenario)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        (config, None)
    } else if let Some(name) = &args.preset {
        let preset = preset(name)
            .with_context(|| format!("unknown preset `{name}` (available: exp1, exp2)"))?;
        (preset.scenario, preset.sweep)
    } else {
        (ScenarioConfig::default(), None)
    };

    if let Some(seed) = args.seed {
        scenario.base_seed = seed;
    }
    if let Some(replications) = args.replications {
        scenario.replications = replications;
    }
    if let Some(horizon) = args.horizon_days {
        scenario.horizon_days = horizon;
    }
    if let Some(raw) = &args.sweep {
        sweep = Some(parse_sweep_flag(raw)?);
    }
    scenario
        .validate()
        .map_err(|e| anyhow::anyhow!("{e}"))
        .context("scenario failed validation")?;
    Ok((scenario, sweep))
}

fn main() -> Result<ExitCode> {
    let args = Args::parse();
    let (scenario, sweep) = load_scenario(&args)?;

    if args.validate_bass {
        let report = validate_bass(&scenario, &args.out).map_err(|e| anyhow::anyhow!("{e}"))?;
        println!(
            "reduced-mode diffusion check: sup deviation {:.3} agents (tolerance {:.1}) -> {}",
            report.sup_deviation,
            report.tolerance,
            if report.passed() { "PASS" } else { "FAIL" }
        );
        println!("trajectories written to {}", report.file.display());
        return Ok(if report.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }

    let report =
        run_experiment(&scenario, sweep.as_ref(), &args.out).map_err(|e| anyhow::anyhow!("{e}"))?;
    for arm in &report.arms {
        match &arm.value {
            Some(value) => println!(
                "arm {value}: digest {:016x}, {} replications, final EV mean {:.2} (std {:.2})",
                arm.digest, arm.replications, arm.final_ev_mean, arm.final_ev_std
            ),
            None => println!(
                "digest {:016x}, {} replications, final EV mean {:.2} (std {:.2})",
                arm.digest, arm.replications, arm.final_ev_mean, arm.final_ev_std
            ),
        }
    }
    println!(
        "{} files written to {}",
        report.files.len(),
        report.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
