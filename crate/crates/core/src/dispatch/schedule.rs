use serde::{Deserialize, Serialize};

use super::{DispatchError, Km, Trip};
use crate::ids::{DriverId, TripId, VehicleId};

pub const DEFAULT_SPEED_KMH: u64 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "id")]
pub enum ScheduleOwner {
    Driver(DriverId),
    Vehicle(VehicleId),
}

/// What the schedule needs from a trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleItem {
    pub trip_id: TripId,
    pub start_ms: u64,
    pub dr: Km,
}

impl From<&Trip> for ScheduleItem {
    fn from(t: &Trip) -> Self {
        Self {
            trip_id: t.trip_id.clone(),
            start_ms: t.requested_time,
            dr: t.planned_dr_km,
        }
    }
}

/// A half-open interval `[start_ms, end_ms)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleEntry {
    pub trip_id: TripId,
    pub start_ms: u64,
    pub end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub owner: ScheduleOwner,
    pub entries: Vec<ScheduleEntry>,
}

/// Travel time for `dr` at `speed_kmh`, rounded up to the millisecond.
pub fn duration_ms(dr: Km, speed_kmh: u64) -> u64 {
    // metres * 3600 / speed = ms
    (dr.metres() * 3600).div_ceil(speed_kmh)
}

pub fn build_schedule<I>(owner: ScheduleOwner, trips: I) -> Result<Schedule, DispatchError>
where
    I: IntoIterator,
    I::Item: Into<ScheduleItem>,
{
    build_schedule_at(owner, trips, DEFAULT_SPEED_KMH)
}

/// Entries sorted by start (then trip id); any overlap fails with the ids of
/// an overlapping pair.
pub fn build_schedule_at<I>(
    owner: ScheduleOwner,
    trips: I,
    speed_kmh: u64,
) -> Result<Schedule, DispatchError>
where
    I: IntoIterator,
    I::Item: Into<ScheduleItem>,
{
    if speed_kmh == 0 {
        return Err(DispatchError::InvalidParam("speed must be positive".into()));
    }
    let mut entries: Vec<ScheduleEntry> = trips
        .into_iter()
        .map(Into::into)
        .map(|i: ScheduleItem| ScheduleEntry {
            end_ms: i.start_ms.saturating_add(duration_ms(i.dr, speed_kmh)),
            trip_id: i.trip_id,
            start_ms: i.start_ms,
        })
        .collect();
    entries.sort_by(|a, b| a.start_ms.cmp(&b.start_ms).then_with(|| a.trip_id.cmp(&b.trip_id)));

    // the entry reaching furthest so far overlaps the current one iff it ends after it starts
    let mut reach: Option<&ScheduleEntry> = None;
    for e in entries.iter().filter(|e| e.end_ms > e.start_ms) {
        if let Some(r) = reach {
            if e.start_ms < r.end_ms {
                return Err(DispatchError::Overlap(r.trip_id.clone(), e.trip_id.clone()));
            }
        }
        if reach.is_none_or(|r| e.end_ms > r.end_ms) {
            reach = Some(e);
        }
    }
    Ok(Schedule { owner, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, start: u64, metres: u64) -> ScheduleItem {
        ScheduleItem {
            trip_id: TripId::new(id),
            start_ms: start,
            dr: Km::from_metres(metres),
        }
    }

    fn owner() -> ScheduleOwner {
        ScheduleOwner::Driver(DriverId::new("D1"))
    }

    #[test]
    fn forty_kmh_is_ninety_ms_per_metre() {
        assert_eq!(duration_ms(Km::from_metres(1), 40), 90);
        assert_eq!(duration_ms(Km::from_metres(40_000), 40), 3_600_000);
        assert_eq!(duration_ms(Km::from_metres(1), 7), 515);
    }

    #[test]
    fn empty_and_back_to_back() {
        assert!(build_schedule(owner(), Vec::<ScheduleItem>::new()).unwrap().entries.is_empty());
        // 1 km = 90 s
        let s = build_schedule(owner(), [item("B", 90_000, 1000), item("A", 0, 1000)]).unwrap();
        let ids: Vec<_> = s.entries.iter().map(|e| e.trip_id.as_str()).collect();
        assert_eq!(ids, ["A", "B"]);
        assert_eq!(s.entries[0].end_ms, 90_000);
    }

    #[test]
    fn overlap_names_both_trips() {
        let err = build_schedule(owner(), [item("A", 0, 1000), item("B", 89_999, 1000)]).unwrap_err();
        assert_eq!(err, DispatchError::Overlap(TripId::new("A"), TripId::new("B")));
        // a long trip covering a later short one that does not touch its neighbour
        let err = build_schedule(
            owner(),
            [item("L", 0, 10_000), item("S1", 100_000, 10), item("S2", 200_000, 10)],
        )
        .unwrap_err();
        assert_eq!(err, DispatchError::Overlap(TripId::new("L"), TripId::new("S1")));
    }

    #[test]
    fn zero_length_trips_never_overlap() {
        assert!(build_schedule(owner(), [item("A", 0, 1000), item("Z", 10, 0)]).is_ok());
    }
}
