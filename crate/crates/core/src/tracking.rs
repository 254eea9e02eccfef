//! Per-vehicle GPS tracks fed by telemetry messages, and a software stand-in
//! for the in-vehicle transmitter.
//!
//! A fix is kept only if both its sequence number and its timestamp advance
//! past the last kept fix, so duplicates and late arrivals are dropped and a
//! track can be rebuilt from any replay of its messages.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{interpolate_along, route_length_km, GeoError, GeoPoint, Polyline, TrackPoint};
use crate::ids::VehicleId;

pub const DEFAULT_TRACK_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackingError {
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("telemetry line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One fix as sent by a vehicle. On the wire:
/// `{"vehicleId":"V000001","lat":..,"lon":..,"ts":..,"seq":..}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryMsg {
    pub vehicle_id: VehicleId,
    pub point: GeoPoint,
    pub timestamp: u64,
    pub seq: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Wire {
    vehicle_id: VehicleId,
    lat: f64,
    lon: f64,
    ts: u64,
    seq: u64,
}

impl Serialize for TelemetryMsg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            vehicle_id: self.vehicle_id.clone(),
            lat: self.point.lat(),
            lon: self.point.lon(),
            ts: self.timestamp,
            seq: self.seq,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TelemetryMsg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let point = GeoPoint::new(w.lat, w.lon).map_err(serde::de::Error::custom)?;
        Ok(TelemetryMsg {
            vehicle_id: w.vehicle_id,
            point,
            timestamp: w.ts,
            seq: w.seq,
        })
    }
}

impl TelemetryMsg {
    pub fn track_point(&self) -> TrackPoint {
        TrackPoint {
            point: self.point,
            timestamp: self.timestamp,
        }
    }
}

/// One JSON message per line; blank lines are skipped.
pub fn parse_telemetry_lines(text: &str) -> Result<Vec<TelemetryMsg>, TrackingError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TrackingError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Track {
    pub vehicle_id: VehicleId,
    points: VecDeque<TrackPoint>,
    last_seq: Option<u64>,
    last_ts: Option<u64>,
}

impl Track {
    pub fn new(vehicle_id: VehicleId) -> Self {
        Self {
            vehicle_id,
            points: VecDeque::new(),
            last_seq: None,
            last_ts: None,
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &TrackPoint> {
        self.points.iter()
    }

    pub fn to_points(&self) -> Vec<TrackPoint> {
        self.points.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<TrackPoint> {
        self.points.back().copied()
    }

    pub fn last_seq(&self) -> Option<u64> {
        self.last_seq
    }

    /// Great-circle length of the retained points.
    pub fn length_km(&self) -> f64 {
        // retained points are strictly increasing in time, so this cannot fail
        route_length_km(&self.to_points()).unwrap_or(0.0)
    }

    /// Points with `from <= timestamp <= to`.
    pub fn between(&self, from: u64, to: u64) -> Vec<TrackPoint> {
        self.points
            .iter()
            .filter(|p| (from..=to).contains(&p.timestamp))
            .copied()
            .collect()
    }

    fn accept(&mut self, msg: &TelemetryMsg, cap: usize) -> IngestOutcome {
        let fresh = self.last_seq.is_none_or(|s| msg.seq > s)
            && self.last_ts.is_none_or(|t| msg.timestamp > t);
        if !fresh {
            return IngestOutcome::RejectedStale;
        }
        self.points.push_back(msg.track_point());
        while self.points.len() > cap {
            self.points.pop_front();
        }
        self.last_seq = Some(msg.seq);
        self.last_ts = Some(msg.timestamp);
        IngestOutcome::Accepted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IngestOutcome {
    Accepted,
    RejectedStale,
}

/// Tracks for all vehicles. Writers to one vehicle are serialized; readers
/// see a whole track as of some instant and never a half-applied fix.
#[derive(Debug)]
pub struct TrackStore {
    tracks: RwLock<HashMap<VehicleId, Arc<RwLock<Track>>>>,
    cap: usize,
}

impl Default for TrackStore {
    fn default() -> Self {
        Self::with_cap(DEFAULT_TRACK_CAP)
    }
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store retaining at most `cap` points per vehicle (at least one).
    pub fn with_cap(cap: usize) -> Self {
        Self {
            tracks: RwLock::new(HashMap::new()),
            cap: cap.max(1),
        }
    }

    fn slot(&self, vehicle: &VehicleId) -> Arc<RwLock<Track>> {
        if let Some(t) = self.tracks.read().get(vehicle) {
            return Arc::clone(t);
        }
        let mut map = self.tracks.write();
        Arc::clone(
            map.entry(vehicle.clone())
                .or_insert_with(|| Arc::new(RwLock::new(Track::new(vehicle.clone())))),
        )
    }

    pub fn ingest(&self, msg: &TelemetryMsg) -> IngestOutcome {
        let slot = self.slot(&msg.vehicle_id);
        let outcome = slot.write().accept(msg, self.cap);
        outcome
    }

    /// The last accepted fix, or `None` for a vehicle never heard from.
    pub fn current_position(&self, vehicle: &VehicleId) -> Option<TrackPoint> {
        let slot = self.tracks.read().get(vehicle).cloned()?;
        let last = slot.read().last();
        last
    }

    pub fn track(&self, vehicle: &VehicleId) -> Option<Track> {
        let slot = self.tracks.read().get(vehicle).cloned()?;
        let t = slot.read().clone();
        Some(t)
    }

    pub fn vehicles(&self) -> Vec<VehicleId> {
        let mut v: Vec<_> = self.tracks.read().keys().cloned().collect();
        v.sort();
        v
    }

    /// Copies of every track, keyed by vehicle.
    pub fn snapshot(&self) -> BTreeMap<VehicleId, Track> {
        let slots: Vec<_> = self.tracks.read().values().cloned().collect();
        slots
            .into_iter()
            .map(|s| {
                let t = s.read().clone();
                (t.vehicle_id.clone(), t)
            })
            .collect()
    }

    pub fn restore(tracks: impl IntoIterator<Item = Track>, cap: usize) -> Self {
        let store = Self::with_cap(cap);
        {
            let mut map = store.tracks.write();
            for t in tracks {
                map.insert(t.vehicle_id.clone(), Arc::new(RwLock::new(t)));
            }
        }
        store
    }
}

/// Serializes as a map of vehicle id to track; restores with the default cap.
impl Serialize for TrackStore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.snapshot().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrackStore {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tracks = BTreeMap::<VehicleId, Track>::deserialize(d)?;
        Ok(TrackStore::restore(tracks.into_values(), DEFAULT_TRACK_CAP))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterConfig {
    pub speed_kmh: f64,
    pub interval_ms: u64,
    pub start_ms: u64,
    pub first_seq: u64,
}

impl TransmitterConfig {
    pub fn new(speed_kmh: f64, interval_ms: u64, start_ms: u64) -> Self {
        Self {
            speed_kmh,
            interval_ms,
            start_ms,
            first_seq: 1,
        }
    }
}

/// Fixes a vehicle driving `path` at constant speed would send, one every
/// `interval_ms`, from the path start to exactly the path end.
pub fn simulate_transmitter(
    vehicle_id: &VehicleId,
    path: &Polyline,
    cfg: TransmitterConfig,
) -> Result<Vec<TelemetryMsg>, TrackingError> {
    if !(cfg.speed_kmh.is_finite() && cfg.speed_kmh > 0.0) {
        return Err(TrackingError::InvalidParam("speed must be positive"));
    }
    if cfg.interval_ms == 0 {
        return Err(TrackingError::InvalidParam("interval must be positive"));
    }
    let total_km = path.length_km();
    let step_km = cfg.speed_kmh * cfg.interval_ms as f64 / 3_600_000.0;
    let mut out = Vec::new();
    for i in 0u64.. {
        let mut f = i as f64 * step_km / total_km;
        // absorb rounding so a path of exactly n steps ends on tick n
        if f >= 1.0 - 1e-9 {
            f = 1.0;
        }
        let point = if f == 1.0 { path.end() } else { interpolate_along(path, f)? };
        out.push(TelemetryMsg {
            vehicle_id: vehicle_id.clone(),
            point,
            timestamp: cfg.start_ms + i * cfg.interval_ms,
            seq: cfg.first_seq + i,
        });
        if f == 1.0 {
            break;
        }
    }
    Ok(out)
}
