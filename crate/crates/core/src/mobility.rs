//! The daily commute and the parking lot.
//!
//! Car owners walk a fixed four-state cycle every workday:
//! AtHome -> WayWork -> AtWork -> WayHome -> AtHome. Arriving at work sends
//! a request to the lot; going home releases the space. Spaces are
//! identical, so requests are served with the lowest-id free space for
//! determinism.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{ConfigError, ProtocolError};
use crate::population::CommuteState;

pub const MINUTES_PER_DAY: u32 = 1440;

/// Day of week; simulation day 0 is a Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    pub fn of_day(day: u32) -> Weekday {
        Self::ALL[(day % 7) as usize]
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Weekday::Mon => "mon",
            Weekday::Tue => "tue",
            Weekday::Wed => "wed",
            Weekday::Thu => "thu",
            Weekday::Fri => "fri",
            Weekday::Sat => "sat",
            Weekday::Sun => "sun",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Weekday> {
        Self::ALL.iter().copied().find(|d| d.short_name() == name)
    }
}

/// Set of weekdays, packed into a byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeekdaySet(u8);

impl WeekdaySet {
    pub const WEEKDAYS: WeekdaySet = WeekdaySet(0b0001_1111);
    pub const EMPTY: WeekdaySet = WeekdaySet(0);

    pub fn from_days(days: &[Weekday]) -> WeekdaySet {
        let mut set = 0u8;
        for d in days {
            set |= 1 << (*d as u8);
        }
        WeekdaySet(set)
    }

    pub fn contains(self, day: Weekday) -> bool {
        self.0 & (1 << (day as u8)) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Weekday> {
        Weekday::ALL.into_iter().filter(move |d| self.contains(*d))
    }
}

/// When everyone commutes. A single calendar is shared by the whole
/// population; per-agent schedules are out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommuteCalendar {
    /// Minutes after midnight at which agents leave home.
    pub depart_home_min: u32,
    /// One-way travel time in minutes.
    pub travel_min: u32,
    /// Minutes after midnight at which agents leave work.
    pub depart_work_min: u32,
    pub workdays: WeekdaySet,
}

impl Default for CommuteCalendar {
    fn default() -> Self {
        CommuteCalendar {
            depart_home_min: 8 * 60,
            travel_min: 30,
            depart_work_min: 17 * 60,
            workdays: WeekdaySet::WEEKDAYS,
        }
    }
}

impl CommuteCalendar {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.depart_home_min >= MINUTES_PER_DAY || self.depart_work_min >= MINUTES_PER_DAY {
            return Err(ConfigError::new(
                "calendar.depart_home/depart_work",
                "departure times must fall within the day",
            ));
        }
        if self.depart_home_min + self.travel_min >= self.depart_work_min {
            return Err(ConfigError::new(
                "calendar.travel_minutes",
                "agents must arrive at work before leaving it",
            ));
        }
        if self.depart_work_min + self.travel_min >= MINUTES_PER_DAY {
            return Err(ConfigError::new(
                "calendar.depart_work",
                "agents must arrive home before midnight",
            ));
        }
        Ok(())
    }

    pub fn is_workday(&self, day: u32) -> bool {
        self.workdays.contains(Weekday::of_day(day))
    }

    /// Absolute times (minutes since run start) of the four commute phases
    /// on `day`, or `None` off-schedule.
    pub fn phase_times(&self, day: u32) -> Option<[u64; 4]> {
        if !self.is_workday(day) {
            return None;
        }
        let base = day as u64 * MINUTES_PER_DAY as u64;
        Some([
            base + self.depart_home_min as u64,
            base + (self.depart_home_min + self.travel_min) as u64,
            base + self.depart_work_min as u64,
            base + (self.depart_work_min + self.travel_min) as u64,
        ])
    }

    /// Number of minutes of `day` spent AtHome or AtWork (where
    /// word-of-mouth can happen).
    pub fn eligible_minutes(&self, day: u32) -> u32 {
        if self.is_workday(day) {
            MINUTES_PER_DAY - 2 * self.travel_min
        } else {
            MINUTES_PER_DAY
        }
    }

    /// Maps an index in `0..eligible_minutes(day)` to a minute-of-day that
    /// skips the two travel windows.
    pub fn eligible_minute(&self, day: u32, index: u32) -> u32 {
        debug_assert!(index < self.eligible_minutes(day));
        if !self.is_workday(day) {
            return index;
        }
        let mut minute = index;
        if minute >= self.depart_home_min {
            minute += self.travel_min;
        }
        if minute >= self.depart_work_min {
            minute += self.travel_min;
        }
        minute
    }
}

/// One of the four daily transitions of the commute cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommuteTransition {
    DepartHome,
    ArriveWork,
    DepartWork,
    ArriveHome,
}

impl CommuteTransition {
    pub const ALL: [CommuteTransition; 4] = [
        CommuteTransition::DepartHome,
        CommuteTransition::ArriveWork,
        CommuteTransition::DepartWork,
        CommuteTransition::ArriveHome,
    ];

    pub fn from_state(self) -> CommuteState {
        match self {
            CommuteTransition::DepartHome => CommuteState::AtHome,
            CommuteTransition::ArriveWork => CommuteState::WayWork,
            CommuteTransition::DepartWork => CommuteState::AtWork,
            CommuteTransition::ArriveHome => CommuteState::WayHome,
        }
    }

    pub fn to_state(self) -> CommuteState {
        match self {
            CommuteTransition::DepartHome => CommuteState::WayWork,
            CommuteTransition::ArriveWork => CommuteState::AtWork,
            CommuteTransition::DepartWork => CommuteState::WayHome,
            CommuteTransition::ArriveHome => CommuteState::AtHome,
        }
    }
}

/// A timed state-chart transition for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommuteEvent {
    pub owner_id: u32,
    pub time_min: u64,
    pub transition: CommuteTransition,
}

/// The four timed transitions of `owner_id`'s commute on `day`, in order;
/// empty off-schedule.
pub fn commute_events(owner_id: u32, calendar: &CommuteCalendar, day: u32) -> Vec<CommuteEvent> {
    match calendar.phase_times(day) {
        None => Vec::new(),
        Some(times) => CommuteTransition::ALL
            .iter()
            .zip(times)
            .map(|(&transition, time_min)| CommuteEvent {
                owner_id,
                time_min,
                transition,
            })
            .collect(),
    }
}

/// A single parking slot. Occupied if and only if it has an occupant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParkingSpace {
    pub id: u32,
    pub occupant: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceState {
    Free,
    Occupied,
}

impl ParkingSpace {
    pub fn state(&self) -> SpaceState {
        if self.occupant.is_some() {
            SpaceState::Occupied
        } else {
            SpaceState::Free
        }
    }
}

/// Outcome of a space request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceRequest {
    Assigned(u32),
    Rejected,
}

/// The shared lot. Tracks which owner holds which space so the message
/// protocol (one space per owner, one owner per space) can be enforced.
///
/// Holdings are indexed by owner id, which callers keep small and dense
/// (agent ids are sequential from zero).
#[derive(Debug, Clone)]
pub struct ParkingLot {
    spaces: Vec<ParkingSpace>,
    free: BinaryHeap<Reverse<u32>>,
    by_owner: Vec<Option<u32>>,
    occupied: u32,
}

impl ParkingLot {
    pub fn new(capacity: u32) -> Self {
        ParkingLot {
            spaces: (0..capacity)
                .map(|id| ParkingSpace { id, occupant: None })
                .collect(),
            free: (0..capacity).map(Reverse).collect(),
            by_owner: Vec::new(),
            occupied: 0,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.spaces.len() as u32
    }

    pub fn occupied_count(&self) -> u32 {
        self.occupied
    }

    pub fn spaces(&self) -> &[ParkingSpace] {
        &self.spaces
    }

    pub fn space_held_by(&self, owner_id: u32) -> Option<u32> {
        self.by_owner.get(owner_id as usize).copied().flatten()
    }

    /// Assigns the lowest-id free space to `owner_id`, or rejects if the
    /// lot is full (leaving it unchanged). An owner that already holds a
    /// space must not ask again.
    pub fn request_space(&mut self, owner_id: u32) -> Result<SpaceRequest, ProtocolError> {
        if let Some(space) = self.space_held_by(owner_id) {
            return Err(ProtocolError::for_agent(
                owner_id,
                format!("requested a space while already holding space {space}"),
            ));
        }
        match self.free.pop() {
            None => Ok(SpaceRequest::Rejected),
            Some(Reverse(space_id)) => {
                self.spaces[space_id as usize].occupant = Some(owner_id);
                if self.by_owner.len() <= owner_id as usize {
                    self.by_owner.resize(owner_id as usize + 1, None);
                }
                self.by_owner[owner_id as usize] = Some(space_id);
                self.occupied += 1;
                Ok(SpaceRequest::Assigned(space_id))
            }
        }
    }

    /// Frees the space held by `owner_id` and returns its id.
    pub fn release_space(&mut self, owner_id: u32) -> Result<u32, ProtocolError> {
        match self.by_owner.get_mut(owner_id as usize).and_then(Option::take) {
            None => Err(ProtocolError::for_agent(
                owner_id,
                "released a space while holding none",
            )),
            Some(space_id) => {
                self.spaces[space_id as usize].occupant = None;
                self.free.push(Reverse(space_id));
                self.occupied -= 1;
                Ok(space_id)
            }
        }
    }

    /// Exhaustive consistency audit: every holder maps to a space occupied
    /// by exactly them, occupied spaces all have holders, and the free list
    /// accounts for the rest.
    pub fn audit(&self) -> Result<(), ProtocolError> {
        let mut occupied = 0u32;
        for space in &self.spaces {
            if let Some(owner) = space.occupant {
                occupied += 1;
                if self.space_held_by(owner) != Some(space.id) {
                    return Err(ProtocolError::for_agent(
                        owner,
                        format!("space {} occupant not recorded as its holder", space.id),
                    ));
                }
            }
        }
        let holders = self.by_owner.iter().filter(|h| h.is_some()).count() as u32;
        if occupied != holders || occupied != self.occupied {
            return Err(ProtocolError::new(format!(
                "{} occupied spaces, {} recorded holders, {} counted",
                occupied, holders, self.occupied
            )));
        }
        if self.free.len() as u32 != self.capacity() - occupied {
            return Err(ProtocolError::new(format!(
                "free list has {} entries, expected {}",
                self.free.len(),
                self.capacity() - occupied
            )));
        }
        Ok(())
    }
}
