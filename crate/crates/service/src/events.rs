//! The append-only event log: one JSON record per line,
//! `{"seq":..,"ts":..,"kind":..,"payload":..}`, with `seq` gap-free from 1.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use fleetline_core::dispatch::{Driver, RejectReason, Trip, TripRequest, Vehicle, VehicleStatus};
use fleetline_core::ids::{CustomerId, ProviderId, RequestId, TripId, VehicleId};
use fleetline_core::reviews::Review;
use fleetline_core::tracking::TelemetryMsg;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{Account, Customer, Notification, PaymentRecord, Provider};

pub const LOG_FILE: &str = "events.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "payload",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase"
)]
pub enum Event {
    AdminBootstrapped { account: Account },
    ProviderRegistered { account: Account, provider: Provider },
    ProviderApproved { provider_id: ProviderId },
    CustomerRegistered { account: Account, customer: Customer },
    DriverAdded { account: Account, driver: Driver },
    VehicleAdded { vehicle: Vehicle },
    VehicleStatusSet { vehicle_id: VehicleId, status: VehicleStatus },
    RequestCreated { request: TripRequest },
    RequestAllocated { request_id: RequestId, trip: Trip },
    RequestRejected { request_id: RequestId, reason: RejectReason },
    TripStarted { trip_id: TripId, at: u64 },
    TelemetryIngested { msg: TelemetryMsg },
    /// Carries the trip with its actual distance, final cost and fuel filled in.
    TripCompleted { trip: Trip, at: u64 },
    TripCancelled { trip_id: TripId, at: u64 },
    PaymentRecorded { payment: PaymentRecord },
    /// `vehicle_id` is set when the review also rates the vehicle that made the trip.
    ReviewSubmitted { review: Review, vehicle_id: Option<VehicleId> },
    /// A rating entered directly, as scenario files do.
    RatingRecorded {
        customer_id: CustomerId,
        vehicle_id: VehicleId,
        rating: f64,
    },
    NotificationSent { notification: Notification },
    ScenarioSeeded { name: String },
}

impl Event {
    pub fn kind(&self) -> String {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.get("kind").and_then(Value::as_str).unwrap_or("").to_owned(),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub seq: u64,
    pub ts: u64,
    pub event: Event,
}

#[derive(Serialize, Deserialize)]
struct Framed {
    seq: u64,
    ts: u64,
    kind: String,
    payload: Value,
}

impl EventRecord {
    pub fn to_line(&self) -> Result<String, LogError> {
        let Value::Object(mut tagged) = serde_json::to_value(&self.event)? else {
            unreachable!("events serialize as objects");
        };
        let framed = Framed {
            seq: self.seq,
            ts: self.ts,
            kind: match tagged.remove("kind") {
                Some(Value::String(k)) => k,
                _ => unreachable!("events carry a kind"),
            },
            payload: tagged.remove("payload").unwrap_or(Value::Null),
        };
        Ok(serde_json::to_string(&framed)?)
    }

    pub fn from_line(line: &str) -> Result<Self, serde_json::Error> {
        let framed: Framed = serde_json::from_str(line)?;
        let event = serde_json::from_value(serde_json::json!({
            "kind": framed.kind,
            "payload": framed.payload,
        }))?;
        Ok(Self {
            seq: framed.seq,
            ts: framed.ts,
            event,
        })
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    /// Bad framing or a sequence gap; `seq` is the sequence number expected
    /// at that point of the log.
    #[error("corrupt event log at seq {seq}: {message}")]
    CorruptLog { seq: u64, message: String },
    #[error("event log i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("event encoding: {0}")]
    Encode(#[from] serde_json::Error),
}

/// Reads and checks every record of the log at `path`; a missing file is an
/// empty log.
pub fn read_log(path: &Path) -> Result<Vec<EventRecord>, LogError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let expected = out.len() as u64 + 1;
        let line = line?;
        let rec = EventRecord::from_line(&line).map_err(|e| LogError::CorruptLog {
            seq: expected,
            message: e.to_string(),
        })?;
        if rec.seq != expected {
            return Err(LogError::CorruptLog {
                seq: expected,
                message: format!("found seq {}", rec.seq),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// The single appender for a log file.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl EventLog {
    /// Opens (creating if needed) the log in `dir`, returning the appender and
    /// the records already there.
    pub fn open(dir: &Path) -> Result<(Self, Vec<EventRecord>), LogError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let records = read_log(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let log = Self {
            path,
            file,
            next_seq: records.len() as u64 + 1,
        };
        Ok((log, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Writes `event` as the next record.
    pub fn append(&mut self, ts: u64, event: Event) -> Result<EventRecord, LogError> {
        let rec = EventRecord {
            seq: self.next_seq,
            ts,
            event,
        };
        let mut line = rec.to_line()?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.next_seq += 1;
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(name: &str) -> Event {
        Event::ScenarioSeeded { name: name.into() }
    }

    #[test]
    fn framing_round_trip() {
        let rec = EventRecord {
            seq: 7,
            ts: 1000,
            event: scenario("x"),
        };
        let line = rec.to_line().unwrap();
        assert_eq!(line, r#"{"seq":7,"ts":1000,"kind":"scenario-seeded","payload":{"name":"x"}}"#);
        assert_eq!(EventRecord::from_line(&line).unwrap(), rec);
        assert_eq!(rec.event.kind(), "scenario-seeded");
    }

    #[test]
    fn append_then_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (mut log, old) = EventLog::open(dir.path()).unwrap();
        assert!(old.is_empty());
        log.append(1, scenario("a")).unwrap();
        log.append(2, scenario("b")).unwrap();
        drop(log);
        let (log, old) = EventLog::open(dir.path()).unwrap();
        assert_eq!(old.len(), 2);
        assert_eq!(log.next_seq(), 3);
        assert_eq!(old[1].event, scenario("b"));
    }

    #[test]
    fn gaps_and_garbage_are_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let (mut log, _) = EventLog::open(dir.path()).unwrap();
        for i in 0..3 {
            log.append(i, scenario(&i.to_string())).unwrap();
        }
        let path = log.path().to_owned();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();

        std::fs::write(&path, format!("{}\n{}\n", lines[0], lines[2])).unwrap();
        assert!(matches!(read_log(&path), Err(LogError::CorruptLog { seq: 2, .. })));

        std::fs::write(&path, format!("{}\n{{\"seq\":2\n", lines[0])).unwrap();
        assert!(matches!(read_log(&path), Err(LogError::CorruptLog { seq: 2, .. })));

        std::fs::write(&path, format!("{}\n{}\n", lines[0], lines[1].replace("scenario-seeded", "nope"))).unwrap();
        assert!(matches!(read_log(&path), Err(LogError::CorruptLog { seq: 2, .. })));
    }
}
