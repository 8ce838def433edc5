//! The scenario file format: line-oriented `section.key = value`.
//!
//! Blank lines and `#` comments are skipped. Every key is optional and
//! falls back to the built-in default; unknown and duplicate keys are
//! rejected with their line number. Parsing is order-independent and
//! `serialize_canonical` emits every key sorted, so
//! parse -> serialize -> parse is the identity on resolved configs.
//!
//! ```text
//! # the core what-if levers
//! lot.capacity = 600
//! population.n_agents = 500
//! adoption.awareness_threshold = 50
//! tariff.ev_strategy = multiplier:0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;

use evpark_core::mobility::{Weekday, WeekdaySet};
use evpark_core::population::CogencyDist;
use evpark_core::tariff::{EvStrategy, TariffPolicy};
use evpark_core::{ConfigError, ScenarioConfig};

/// A scenario file problem, located as precisely as possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ScenarioError {
    fn at(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError {
            line: Some(line),
            key: Some(key.into()),
            message: message.into(),
        }
    }

}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(line), Some(key)) => write!(f, "line {line}: {key}: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "{key}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

const SCALAR_KEYS: &[&str] = &[
    "adoption.ad_rate",
    "adoption.adoption_fraction",
    "adoption.awareness_threshold",
    "adoption.contact_rate",
    "adoption.ev_price",
    "adoption.incentive_beta",
    "adoption.salary_by_level",
    "adoption.subsidy_cap",
    "adoption.subsidy_fraction",
    "calendar.depart_home",
    "calendar.depart_work",
    "calendar.travel_minutes",
    "calendar.workdays",
    "energy.ev_intensity",
    "energy.intensity_by_category",
    "energy.round_trip_km",
    "lot.capacity",
    "population.cogency",
    "population.fleet_category_weights",
    "population.n_agents",
    "population.staff_level_weights",
    "population.stereotype_count",
    "run.horizon_days",
    "run.replications",
    "run.seed",
    "tariff.accrual_workdays_per_year",
    "tariff.ev_strategy",
    "tariff.table.a",
    "tariff.table.b",
    "tariff.table.c",
    "tariff.table.d",
    "tariff.table.e",
];

const STEREOTYPE_FIELDS: &[&str] = &["share", "ea_low", "ea_high", "buy_probability"];

fn is_known_key(key: &str) -> bool {
    SCALAR_KEYS.contains(&key) || parse_stereotype_key(key).is_some()
}

/// `population.stereotype<i>.<field>` -> `(i, field)`. The index must be
/// written canonically (plain digits, no leading zero) so each stereotype
/// field has exactly one spelling and duplicate detection holds.
fn parse_stereotype_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("population.stereotype")?;
    let dot = rest.find('.')?;
    let digits = &rest[..dot];
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let index: usize = digits.parse().ok()?;
    let field = &rest[dot + 1..];
    if STEREOTYPE_FIELDS.contains(&field) {
        Some((index, field))
    } else {
        None
    }
}

/// Parses scenario text into a fully resolved configuration, with all
/// defaults filled in and every module's validation applied.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ScenarioError {
                line: Some(line_no),
                key: None,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !is_known_key(&key) {
            return Err(ScenarioError::at(line_no, key, "unknown key"));
        }
        if let Some((_, first)) = entries.get(&key) {
            return Err(ScenarioError::at(
                line_no,
                key,
                format!("duplicate key (first set on line {first})"),
            ));
        }
        entries.insert(key, (value, line_no));
    }
    build(&entries)
}

/// Applies one `key = value` override (a sweep arm) on top of an existing
/// configuration.
pub fn apply_override(
    base: &ScenarioConfig,
    key: &str,
    value: &str,
) -> Result<ScenarioConfig, ScenarioError> {
    if !is_known_key(key) {
        return Err(ScenarioError {
            line: None,
            key: Some(key.to_string()),
            message: "unknown key".into(),
        });
    }
    let mut raw = RawScenario::from_config(base);
    raw.apply(key, value).map_err(|message| ScenarioError {
        line: None,
        key: Some(key.to_string()),
        message,
    })?;
    raw.finish(&BTreeMap::new())
}

fn build(entries: &BTreeMap<String, (String, usize)>) -> Result<ScenarioConfig, ScenarioError> {
    let mut raw = RawScenario::from_config(&ScenarioConfig::default());

    // The stereotype count reshapes the list, so it must land first; the
    // remaining keys each own a distinct field and commute.
    if let Some((value, line)) = entries.get("population.stereotype_count") {
        raw.apply("population.stereotype_count", value)
            .map_err(|m| ScenarioError::at(*line, "population.stereotype_count", m))?;
    }
    for (key, (value, line)) in entries {
        if key == "population.stereotype_count" {
            continue;
        }
        raw.apply(key, value)
            .map_err(|m| ScenarioError::at(*line, key.clone(), m))?;
    }

    let lines: BTreeMap<String, usize> = entries
        .iter()
        .map(|(k, (_, line))| (k.clone(), *line))
        .collect();
    raw.finish(&lines)
}

/// Staging area: the tariff pieces stay raw until the end so table rows and
/// the strategy can be set independently before `TariffPolicy` validation.
struct RawScenario {
    config: ScenarioConfig,
    table: [[f64; 7]; 5],
    ev_strategy: EvStrategy,
    accrual_workdays: u32,
}

impl RawScenario {
    fn from_config(config: &ScenarioConfig) -> Self {
        RawScenario {
            table: *config.tariff.table(),
            ev_strategy: config.tariff.ev_strategy.clone(),
            accrual_workdays: config.tariff.accrual_workdays_per_year,
            config: config.clone(),
        }
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        if let Some((index, field)) = parse_stereotype_key(key) {
            let list = &mut self.config.population.stereotypes;
            if index > list.len() {
                return Err(format!(
                    "stereotype index out of range (population.stereotype_count = {})",
                    list.len()
                ));
            }
            let entry = &mut list[index - 1];
            let parsed = parse_f64(value)?;
            match field {
                "share" => entry.share = parsed,
                "ea_low" => entry.ea_low = parsed,
                "ea_high" => entry.ea_high = parsed,
                "buy_probability" => entry.buy_probability = parsed,
                _ => unreachable!("field checked by parse_stereotype_key"),
            }
            return Ok(());
        }

        let config = &mut self.config;
        match key {
            "adoption.ad_rate" => config.adoption.ad_rate = parse_f64(value)?,
            "adoption.adoption_fraction" => config.adoption.adoption_fraction = parse_f64(value)?,
            "adoption.awareness_threshold" => {
                config.adoption.awareness_threshold = parse_f64(value)?
            }
            "adoption.contact_rate" => config.adoption.contact_rate = parse_f64(value)?,
            "adoption.ev_price" => config.adoption.ev_price = parse_f64(value)?,
            "adoption.incentive_beta" => config.adoption.incentive_beta = parse_f64(value)?,
            "adoption.salary_by_level" => {
                config.adoption.salary_by_level = parse_f64_array::<7>(value)?
            }
            "adoption.subsidy_cap" => config.adoption.subsidy_cap = parse_f64(value)?,
            "adoption.subsidy_fraction" => config.adoption.subsidy_fraction = parse_f64(value)?,
            "calendar.depart_home" => config.calendar.depart_home_min = parse_time(value)?,
            "calendar.depart_work" => config.calendar.depart_work_min = parse_time(value)?,
            "calendar.travel_minutes" => config.calendar.travel_min = parse_u32(value)?,
            "calendar.workdays" => config.calendar.workdays = parse_workdays(value)?,
            "energy.ev_intensity" => config.energy.ev_intensity = parse_f64(value)?,
            "energy.intensity_by_category" => {
                config.energy.intensity_by_category = parse_f64_array::<5>(value)?
            }
            "energy.round_trip_km" => config.energy.round_trip_km = parse_f64(value)?,
            "lot.capacity" => config.lot_capacity = parse_u32(value)?,
            "population.cogency" => config.population.cogency = parse_cogency(value)?,
            "population.fleet_category_weights" => {
                config.population.fleet_category_weights = parse_f64_array::<5>(value)?
            }
            "population.n_agents" => config.population.n_agents = parse_u32(value)?,
            "population.staff_level_weights" => {
                config.population.staff_level_weights = parse_f64_array::<7>(value)?
            }
            "population.stereotype_count" => {
                let count: usize = parse_u32(value)? as usize;
                if count == 0 || count > 32 {
                    return Err("stereotype count must be between 1 and 32".into());
                }
                let list = &mut config.population.stereotypes;
                list.truncate(count);
                while list.len() < count {
                    // Placeholder; every field must be set explicitly.
                    list.push(evpark_core::population::StereotypeSpec {
                        id: list.len() as u8 + 1,
                        share: f64::NAN,
                        ea_low: f64::NAN,
                        ea_high: f64::NAN,
                        buy_probability: f64::NAN,
                    });
                }
            }
            "run.horizon_days" => config.horizon_days = parse_u32(value)?,
            "run.replications" => config.replications = parse_u32(value)?,
            "run.seed" => config.base_seed = parse_u64(value)?,
            "tariff.accrual_workdays_per_year" => self.accrual_workdays = parse_u32(value)?,
            "tariff.ev_strategy" => self.ev_strategy = parse_ev_strategy(value)?,
            "tariff.table.a" => self.table[0] = parse_f64_array::<7>(value)?,
            "tariff.table.b" => self.table[1] = parse_f64_array::<7>(value)?,
            "tariff.table.c" => self.table[2] = parse_f64_array::<7>(value)?,
            "tariff.table.d" => self.table[3] = parse_f64_array::<7>(value)?,
            "tariff.table.e" => self.table[4] = parse_f64_array::<7>(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    fn finish(self, lines: &BTreeMap<String, usize>) -> Result<ScenarioConfig, ScenarioError> {
        let RawScenario {
            mut config,
            table,
            ev_strategy,
            accrual_workdays,
        } = self;

        for (i, s) in config.population.stereotypes.iter().enumerate() {
            if s.share.is_nan()
                || s.ea_low.is_nan()
                || s.ea_high.is_nan()
                || s.buy_probability.is_nan()
            {
                return Err(ScenarioError {
                    line: None,
                    key: Some(format!("population.stereotype{}", i + 1)),
                    message: "all fields are required for stereotypes beyond the built-in four"
                        .into(),
                });
            }
        }

        config.tariff = TariffPolicy::new(table, ev_strategy, accrual_workdays)
            .map_err(|e| locate_config_error(e, lines))?;
        config
            .validate()
            .map_err(|e| locate_config_error(e, lines))?;
        Ok(config)
    }
}

/// Maps a core validation error back to the scenario line that set the
/// offending field, when there is one.
fn locate_config_error(e: ConfigError, lines: &BTreeMap<String, usize>) -> ScenarioError {
    let field = e.field.to_ascii_lowercase();
    let line = lines.get(&field).copied().or_else(|| {
        lines
            .iter()
            .filter(|(key, _)| field.starts_with(key.as_str()))
            .map(|(_, line)| *line)
            .next()
    });
    ScenarioError {
        line,
        key: Some(e.field),
        message: e.reason,
    }
}

fn parse_f64(value: &str) -> Result<f64, String> {
    let parsed: f64 = value
        .parse()
        .map_err(|_| format!("expected a number, got `{value}`"))?;
    if parsed.is_nan() {
        return Err("NaN is not a valid value".into());
    }
    Ok(parsed)
}

fn parse_u32(value: &str) -> Result<u32, String> {
    value
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got `{value}`"))
}

fn parse_u64(value: &str) -> Result<u64, String> {
    value
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got `{value}`"))
}

fn parse_f64_array<const N: usize>(value: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!(
            "expected {N} comma-separated numbers, got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_f64(part)?;
    }
    Ok(out)
}

/// `HH:MM` -> minutes after midnight.
fn parse_time(value: &str) -> Result<u32, String> {
    let err = || format!("expected a time of day `HH:MM`, got `{value}`");
    let (h, m) = value.split_once(':').ok_or_else(err)?;
    let hours: u32 = h.parse().map_err(|_| err())?;
    let minutes: u32 = m.parse().map_err(|_| err())?;
    if hours > 23 || minutes > 59 || m.len() != 2 {
        return Err(err());
    }
    Ok(hours * 60 + minutes)
}

fn format_time(minutes_after_midnight: u32) -> String {
    format!(
        "{:02}:{:02}",
        minutes_after_midnight / 60,
        minutes_after_midnight % 60
    )
}

fn parse_workdays(value: &str) -> Result<WeekdaySet, String> {
    let mut days = Vec::new();
    if !value.trim().is_empty() {
        for part in value.split(',') {
            let name = part.trim();
            let day = Weekday::from_short_name(name)
                .ok_or_else(|| format!("unknown weekday `{name}` (use mon..sun)"))?;
            days.push(day);
        }
    }
    Ok(WeekdaySet::from_days(&days))
}

fn parse_cogency(value: &str) -> Result<CogencyDist, String> {
    if value == "adoption_fraction" {
        return Ok(CogencyDist::AdoptionFraction);
    }
    if let Some(c) = value.strip_prefix("constant:") {
        return Ok(CogencyDist::Constant(parse_f64(c)?));
    }
    if let Some(range) = value.strip_prefix("uniform:") {
        let [lo, hi] = parse_f64_array::<2>(range)?;
        return Ok(CogencyDist::Uniform { lo, hi });
    }
    Err(format!(
        "expected `adoption_fraction`, `constant:<c>` or `uniform:<lo>,<hi>`, got `{value}`"
    ))
}

fn parse_ev_strategy(value: &str) -> Result<EvStrategy, String> {
    if value == "same_as_a" {
        return Ok(EvStrategy::SameAsCategoryA);
    }
    if let Some(m) = value.strip_prefix("multiplier:") {
        return Ok(EvStrategy::Multiplier(parse_f64(m)?));
    }
    if let Some(charges) = value.strip_prefix("flat:") {
        return Ok(EvStrategy::FlatTable(parse_f64_array::<7>(charges)?));
    }
    Err(format!(
        "expected `same_as_a`, `multiplier:<m>` or `flat:<7 charges>`, got `{value}`"
    ))
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Emits every key of `config`, sorted, in the scenario file format.
/// The output parses back to an equal configuration.
pub fn serialize_canonical(config: &ScenarioConfig) -> String {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut put = |key: &str, value: String| pairs.push((key.to_string(), value));

    let a = &config.adoption;
    put("adoption.ad_rate", a.ad_rate.to_string());
    put("adoption.adoption_fraction", a.adoption_fraction.to_string());
    put(
        "adoption.awareness_threshold",
        a.awareness_threshold.to_string(),
    );
    put("adoption.contact_rate", a.contact_rate.to_string());
    put("adoption.ev_price", a.ev_price.to_string());
    put("adoption.incentive_beta", a.incentive_beta.to_string());
    put("adoption.salary_by_level", join_f64(&a.salary_by_level));
    put("adoption.subsidy_cap", a.subsidy_cap.to_string());
    put("adoption.subsidy_fraction", a.subsidy_fraction.to_string());

    let c = &config.calendar;
    put("calendar.depart_home", format_time(c.depart_home_min));
    put("calendar.depart_work", format_time(c.depart_work_min));
    put("calendar.travel_minutes", c.travel_min.to_string());
    let workdays: Vec<&str> = c.workdays.iter().map(|d| d.short_name()).collect();
    put("calendar.workdays", workdays.join(","));

    let e = &config.energy;
    put("energy.ev_intensity", e.ev_intensity.to_string());
    put(
        "energy.intensity_by_category",
        join_f64(&e.intensity_by_category),
    );
    put("energy.round_trip_km", e.round_trip_km.to_string());

    put("lot.capacity", config.lot_capacity.to_string());

    let p = &config.population;
    let cogency = match p.cogency {
        CogencyDist::AdoptionFraction => "adoption_fraction".to_string(),
        CogencyDist::Constant(c) => format!("constant:{c}"),
        CogencyDist::Uniform { lo, hi } => format!("uniform:{lo},{hi}"),
    };
    put("population.cogency", cogency);
    put(
        "population.fleet_category_weights",
        join_f64(&p.fleet_category_weights),
    );
    put("population.n_agents", p.n_agents.to_string());
    put(
        "population.staff_level_weights",
        join_f64(&p.staff_level_weights),
    );
    put(
        "population.stereotype_count",
        p.stereotypes.len().to_string(),
    );
    for (i, s) in p.stereotypes.iter().enumerate() {
        let n = i + 1;
        put(
            &format!("population.stereotype{n}.buy_probability"),
            s.buy_probability.to_string(),
        );
        put(
            &format!("population.stereotype{n}.ea_high"),
            s.ea_high.to_string(),
        );
        put(
            &format!("population.stereotype{n}.ea_low"),
            s.ea_low.to_string(),
        );
        put(
            &format!("population.stereotype{n}.share"),
            s.share.to_string(),
        );
    }

    put("run.horizon_days", config.horizon_days.to_string());
    put("run.replications", config.replications.to_string());
    put("run.seed", config.base_seed.to_string());

    let t = &config.tariff;
    put(
        "tariff.accrual_workdays_per_year",
        t.accrual_workdays_per_year.to_string(),
    );
    let strategy = match &t.ev_strategy {
        EvStrategy::SameAsCategoryA => "same_as_a".to_string(),
        EvStrategy::Multiplier(m) => format!("multiplier:{m}"),
        EvStrategy::FlatTable(charges) => format!("flat:{}", join_f64(charges)),
    };
    put("tariff.ev_strategy", strategy);
    for (row, name) in t.table().iter().zip(["a", "b", "c", "d", "e"]) {
        put(&format!("tariff.table.{name}"), join_f64(row));
    }

    pairs.sort();
    let mut out = String::new();
    for (key, value) in pairs {
        out.push_str(&key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    }
    out
}
