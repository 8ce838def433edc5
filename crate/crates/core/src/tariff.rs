//! Parking-charge policy and per-day accounting.
//!
//! Annual permit charges are a 5x7 table: rows are vehicle emissions
//! categories A-E (cleanest to dirtiest), columns are staff levels 1-7
//! (lowest to highest pay grade). Charges accrue per workday parked at
//! `annual / accrual_workdays_per_year`. Electric vehicles are charged
//! according to a configurable strategy; the status quo places them in the
//! lowest emissions band.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::error::ConfigError;

/// Vehicle emissions category, the tariff's row key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmissionsCategory {
    A,
    B,
    C,
    D,
    E,
}

impl EmissionsCategory {
    pub const ALL: [EmissionsCategory; 5] = [
        EmissionsCategory::A,
        EmissionsCategory::B,
        EmissionsCategory::C,
        EmissionsCategory::D,
        EmissionsCategory::E,
    ];

    /// Row index 0-4.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for EmissionsCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            EmissionsCategory::A => 'A',
            EmissionsCategory::B => 'B',
            EmissionsCategory::C => 'C',
            EmissionsCategory::D => 'D',
            EmissionsCategory::E => 'E',
        };
        write!(f, "{c}")
    }
}

/// Staff pay grade 1-7, the tariff's column key. Validated on construction
/// so lookups are total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StaffLevel(u8);

impl StaffLevel {
    pub fn new(level: u8) -> Result<Self, ConfigError> {
        if (1..=7).contains(&level) {
            Ok(StaffLevel(level))
        } else {
            Err(ConfigError::new(
                "staff_level",
                format!("must be 1-7, got {level}"),
            ))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Column index 0-6.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for StaffLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What an electric vehicle pays.
#[derive(Debug, Clone, PartialEq)]
pub enum EvStrategy {
    /// Status quo: EVs fall in the lowest emissions band and pay the
    /// category-A rate for their level.
    SameAsCategoryA,
    /// A fraction of the category-A rate (0 = free EV parking).
    Multiplier(f64),
    /// An explicit per-level charge.
    FlatTable([f64; 7]),
}

/// Built-in default annual charges (currency/year), categories A-E by staff
/// levels 1-7.
pub const DEFAULT_CHARGE_TABLE: [[f64; 7]; 5] = [
    [44.0, 57.0, 75.0, 105.0, 132.0, 165.0, 210.0],
    [58.0, 76.0, 100.0, 140.0, 176.0, 220.0, 280.0],
    [73.0, 95.0, 125.0, 175.0, 220.0, 275.0, 350.0],
    [87.0, 114.0, 150.0, 210.0, 264.0, 330.0, 420.0],
    [102.0, 133.0, 175.0, 245.0, 308.0, 385.0, 490.0],
];

/// Default number of accrual workdays per year.
pub const DEFAULT_ACCRUAL_WORKDAYS: u32 = 220;

/// The parking-charge policy: the annual charge table, the EV strategy, and
/// the accrual rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TariffPolicy {
    table: [[f64; 7]; 5],
    pub ev_strategy: EvStrategy,
    pub accrual_workdays_per_year: u32,
}

impl TariffPolicy {
    /// Builds a policy, validating that charges strictly increase down each
    /// column (A to E) and across each row (level 1 to 7).
    pub fn new(
        table: [[f64; 7]; 5],
        ev_strategy: EvStrategy,
        accrual_workdays_per_year: u32,
    ) -> Result<Self, ConfigError> {
        for (r, row) in table.iter().enumerate() {
            for (c, &charge) in row.iter().enumerate() {
                if !charge.is_finite() || charge < 0.0 {
                    return Err(ConfigError::new(
                        table_field(r, c),
                        "charges must be finite and non-negative",
                    ));
                }
                if c > 0 && row[c] <= row[c - 1] {
                    return Err(ConfigError::new(
                        table_field(r, c),
                        "charges must strictly increase with staff level",
                    ));
                }
                if r > 0 && table[r][c] <= table[r - 1][c] {
                    return Err(ConfigError::new(
                        table_field(r, c),
                        "charges must strictly increase with emissions category",
                    ));
                }
            }
        }
        match &ev_strategy {
            EvStrategy::SameAsCategoryA => {}
            EvStrategy::Multiplier(m) => {
                if !(0.0..=1.0).contains(m) {
                    return Err(ConfigError::new(
                        "tariff.ev_strategy",
                        format!("multiplier must be in [0, 1], got {m}"),
                    ));
                }
            }
            EvStrategy::FlatTable(charges) => {
                if charges.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return Err(ConfigError::new(
                        "tariff.ev_strategy",
                        "flat charges must be finite and non-negative",
                    ));
                }
            }
        }
        if accrual_workdays_per_year == 0 {
            return Err(ConfigError::new(
                "tariff.accrual_workdays_per_year",
                "must be at least 1",
            ));
        }
        Ok(TariffPolicy {
            table,
            ev_strategy,
            accrual_workdays_per_year,
        })
    }

    pub fn table(&self) -> &[[f64; 7]; 5] {
        &self.table
    }

    /// Annual charge for a conventional vehicle.
    pub fn lookup_charge(&self, category: EmissionsCategory, level: StaffLevel) -> f64 {
        self.table[category.index()][level.index()]
    }

    /// Annual charge for an electric vehicle under the active strategy.
    pub fn ev_charge(&self, level: StaffLevel) -> f64 {
        let category_a = self.table[EmissionsCategory::A.index()][level.index()];
        match &self.ev_strategy {
            EvStrategy::SameAsCategoryA => category_a,
            EvStrategy::Multiplier(m) => m * category_a,
            EvStrategy::FlatTable(charges) => charges[level.index()],
        }
    }

    /// Annual charge for any vehicle.
    pub fn charge_for(&self, vehicle: Vehicle, level: StaffLevel) -> f64 {
        match vehicle {
            Vehicle::Conventional(cat) => self.lookup_charge(cat, level),
            Vehicle::Electric => self.ev_charge(level),
        }
    }
}

impl Default for TariffPolicy {
    fn default() -> Self {
        TariffPolicy::new(
            DEFAULT_CHARGE_TABLE,
            EvStrategy::SameAsCategoryA,
            DEFAULT_ACCRUAL_WORKDAYS,
        )
        .expect("built-in table is valid")
    }
}

fn table_field(row: usize, col: usize) -> String {
    let cat = EmissionsCategory::from_index(row).expect("row in range");
    format!("tariff.table.{}[level {}]", cat, col + 1)
}

/// What a car owner drives. Conventional vehicles carry their emissions
/// category; the tariff and the energy proxy both key off it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vehicle {
    Conventional(EmissionsCategory),
    Electric,
}

impl Vehicle {
    pub fn is_electric(self) -> bool {
        matches!(self, Vehicle::Electric)
    }
}

/// Converts the commuting fleet into a daily energy figure: a per-category
/// emissions intensity (g CO2 per km) times a fixed round trip. The
/// defaults are representative values for the A-E bands.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub intensity_by_category: [f64; 5],
    pub round_trip_km: f64,
    pub ev_intensity: f64,
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self
            .intensity_by_category
            .iter()
            .any(|i| !i.is_finite() || *i < 0.0)
        {
            return Err(ConfigError::new(
                "energy.intensity_by_category",
                "intensities must be finite and non-negative",
            ));
        }
        if !self.round_trip_km.is_finite() || self.round_trip_km <= 0.0 {
            return Err(ConfigError::new(
                "energy.round_trip_km",
                "must be positive",
            ));
        }
        if !self.ev_intensity.is_finite() || self.ev_intensity < 0.0 {
            return Err(ConfigError::new(
                "energy.ev_intensity",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }

    pub fn intensity(&self, vehicle: Vehicle) -> f64 {
        match vehicle {
            Vehicle::Conventional(cat) => self.intensity_by_category[cat.index()],
            Vehicle::Electric => self.ev_intensity,
        }
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            intensity_by_category: [110.0, 135.0, 158.0, 183.0, 220.0],
            round_trip_km: 20.0,
            ev_intensity: 0.0,
        }
    }
}

/// One agent's commute on one day, as seen by the accountant. Rejected
/// agents commuted (and burned fuel) but did not park (and paid nothing).
#[derive(Debug, Clone, Copy)]
pub struct CommuterDay {
    pub vehicle: Vehicle,
    pub level: StaffLevel,
    pub parked: bool,
}

/// Revenue and fleet-energy totals for one day.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DayAccrual {
    pub revenue: f64,
    pub energy_grams: f64,
}

/// Accrues one day of parking revenue and fleet energy.
///
/// Revenue: each parked vehicle contributes its annual charge divided by the
/// accrual workdays. Energy: every commuter contributes intensity times the
/// round trip, parked or not.
pub fn accrue_day(
    commuters: &[CommuterDay],
    policy: &TariffPolicy,
    energy: &EnergyModel,
) -> DayAccrual {
    let per_day = policy.accrual_workdays_per_year as f64;
    let mut acc = DayAccrual::default();
    for c in commuters {
        if c.parked {
            acc.revenue += policy.charge_for(c.vehicle, c.level) / per_day;
        }
        acc.energy_grams += energy.intensity(c.vehicle) * energy.round_trip_km;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(l: u8) -> StaffLevel {
        StaffLevel::new(l).unwrap()
    }

    #[test]
    fn default_table_spot_checks() {
        let policy = TariffPolicy::default();
        assert_eq!(policy.lookup_charge(EmissionsCategory::A, level(1)), 44.0);
        assert_eq!(policy.lookup_charge(EmissionsCategory::C, level(4)), 175.0);
        assert_eq!(policy.lookup_charge(EmissionsCategory::E, level(7)), 490.0);
    }

    #[test]
    fn staff_level_bounds() {
        assert!(StaffLevel::new(0).is_err());
        assert!(StaffLevel::new(8).is_err());
        assert_eq!(level(7).index(), 6);
    }

    #[test]
    fn monotonicity_validated_at_load() {
        let mut table = DEFAULT_CHARGE_TABLE;
        table[2][3] = 100.0; // breaks the row: 100 at level 4 after 125 at level 3
        let err = TariffPolicy::new(table, EvStrategy::SameAsCategoryA, 220).unwrap_err();
        assert!(err.field.starts_with("tariff.table.C"), "{err}");

        let mut table = DEFAULT_CHARGE_TABLE;
        table[3][0] = 73.0; // equals the entry above it
        assert!(TariffPolicy::new(table, EvStrategy::SameAsCategoryA, 220).is_err());
    }

    #[test]
    fn ev_charge_strategies() {
        let policy = TariffPolicy::default();
        assert_eq!(policy.ev_charge(level(3)), 75.0);

        let free = TariffPolicy::new(DEFAULT_CHARGE_TABLE, EvStrategy::Multiplier(0.0), 220)
            .unwrap();
        for l in 1..=7 {
            assert_eq!(free.ev_charge(level(l)), 0.0);
        }

        let half = TariffPolicy::new(DEFAULT_CHARGE_TABLE, EvStrategy::Multiplier(0.5), 220)
            .unwrap();
        assert_eq!(half.ev_charge(level(7)), 105.0);

        let flat = TariffPolicy::new(
            DEFAULT_CHARGE_TABLE,
            EvStrategy::FlatTable([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            220,
        )
        .unwrap();
        assert_eq!(flat.ev_charge(level(2)), 2.0);
    }

    #[test]
    fn multiplier_out_of_range_rejected() {
        assert!(
            TariffPolicy::new(DEFAULT_CHARGE_TABLE, EvStrategy::Multiplier(1.5), 220).is_err()
        );
    }

    #[test]
    fn accrue_empty_day_is_zero() {
        let acc = accrue_day(&[], &TariffPolicy::default(), &EnergyModel::default());
        assert_eq!(acc, DayAccrual::default());
    }

    #[test]
    fn accrue_single_commuter() {
        // Category B, level 2: 76/year over 220 workdays; 135 g/km over 20 km.
        let acc = accrue_day(
            &[CommuterDay {
                vehicle: Vehicle::Conventional(EmissionsCategory::B),
                level: level(2),
                parked: true,
            }],
            &TariffPolicy::default(),
            &EnergyModel::default(),
        );
        assert!((acc.revenue - 76.0 / 220.0).abs() < 1e-12);
        assert_eq!(acc.energy_grams, 2700.0);
    }

    #[test]
    fn ev_conversion_decreases_revenue_and_energy() {
        let policy =
            TariffPolicy::new(DEFAULT_CHARGE_TABLE, EvStrategy::Multiplier(0.5), 220).unwrap();
        let energy = EnergyModel::default();
        for cat in EmissionsCategory::ALL {
            for l in 1..=7 {
                let conv = accrue_day(
                    &[CommuterDay {
                        vehicle: Vehicle::Conventional(cat),
                        level: level(l),
                        parked: true,
                    }],
                    &policy,
                    &energy,
                );
                let ev = accrue_day(
                    &[CommuterDay {
                        vehicle: Vehicle::Electric,
                        level: level(l),
                        parked: true,
                    }],
                    &policy,
                    &energy,
                );
                assert!(ev.revenue < conv.revenue);
                assert!(ev.energy_grams < conv.energy_grams);
            }
        }
    }

    #[test]
    fn rejected_commuter_burns_fuel_but_pays_nothing() {
        let acc = accrue_day(
            &[CommuterDay {
                vehicle: Vehicle::Conventional(EmissionsCategory::E),
                level: level(5),
                parked: false,
            }],
            &TariffPolicy::default(),
            &EnergyModel::default(),
        );
        assert_eq!(acc.revenue, 0.0);
        assert_eq!(acc.energy_grams, 220.0 * 20.0);
    }
}
