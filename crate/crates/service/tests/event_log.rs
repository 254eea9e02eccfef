mod common;

use std::fs;
use std::path::Path;

use common::{options, World};
use fleetline::events::{read_log, LogError, LOG_FILE};
use fleetline::service::{replay_dir, SNAPSHOT_FILE};
use fleetline::state::State;
use fleetline::ServiceOptions;
use proptest::prelude::*;
use serde_json::json;

fn busy_world(dir: &Path, opts: ServiceOptions) -> Vec<u8> {
    let w = World::on_disk(dir, opts);
    let t = w.completed_trip("a", 275);
    w.ok(w.post(&format!("/api/trips/{}/payment", t.trip_id), &t.customer, json!({})));
    w.ok(w.post("/api/reviews", &t.customer, json!({ "tripId": t.trip_id, "text": "good", "stars": 4 })));
    w.completed_trip("b", 410);
    w.svc.canonical_state()
}

#[test]
fn empty_log_bootstraps_one_admin() {
    let dir = tempfile::tempdir().unwrap();
    let w = World::on_disk(dir.path(), options());
    assert_eq!(w.svc.seq(), 1);
    let records = read_log(&dir.path().join(LOG_FILE)).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].event.kind(), "admin-bootstrapped");
    drop(w);
    let again = World::on_disk(dir.path(), options());
    assert_eq!(again.svc.seq(), 1);
}

#[test]
fn restart_replays_to_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let live = busy_world(dir.path(), options());
    let replayed = replay_dir(dir.path()).unwrap();
    assert_eq!(replayed.canonical_bytes(), live);
    let twice = replay_dir(dir.path()).unwrap();
    assert_eq!(twice.canonical_bytes(), live);
    let reopened = World::on_disk(dir.path(), options());
    assert_eq!(reopened.svc.canonical_state(), live);
}

#[test]
fn snapshot_start_matches_full_replay() {
    let dir = tempfile::tempdir().unwrap();
    let opts = ServiceOptions {
        snapshot_every: Some(7),
        ..options()
    };
    let live = busy_world(dir.path(), opts.clone());
    assert!(dir.path().join(SNAPSHOT_FILE).exists());
    let records = read_log(&dir.path().join(LOG_FILE)).unwrap();
    let full = State::replay(&records).unwrap();
    assert_eq!(full.canonical_bytes(), live);
    assert_eq!(replay_dir(dir.path()).unwrap().canonical_bytes(), live);
    let reopened = World::on_disk(dir.path(), opts);
    assert_eq!(reopened.svc.canonical_state(), live);
}

#[test]
fn every_prefix_replays_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    busy_world(dir.path(), options());
    let records = read_log(&dir.path().join(LOG_FILE)).unwrap();
    for n in [1, 2, records.len() / 2, records.len()] {
        let a = State::replay(&records[..n]).unwrap();
        let b = State::replay(&records[..n]).unwrap();
        assert_eq!(a.seq, n as u64);
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    }
}

fn rewrite_log(dir: &Path, f: impl FnOnce(&mut Vec<String>)) {
    let path = dir.join(LOG_FILE);
    let mut lines: Vec<String> = fs::read_to_string(&path).unwrap().lines().map(str::to_owned).collect();
    f(&mut lines);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
}

fn open_error(dir: &Path) -> LogError {
    match fleetline::Service::open(dir, options(), std::sync::Arc::new(fleetline::clock::ManualClock::new(0))) {
        Ok(_) => panic!("corrupt log opened"),
        Err(e) => e,
    }
}

#[test]
fn a_deleted_record_halts_startup_at_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    busy_world(dir.path(), options());
    rewrite_log(dir.path(), |lines| {
        lines.remove(4);
    });
    match open_error(dir.path()) {
        LogError::CorruptLog { seq, .. } => assert_eq!(seq, 5),
        other => panic!("{other:?}"),
    }
}

#[test]
fn a_garbled_record_halts_startup() {
    let dir = tempfile::tempdir().unwrap();
    busy_world(dir.path(), options());
    rewrite_log(dir.path(), |lines| {
        lines[2] = "{\"seq\":3,\"ts\":0,\"kind\":\"vehicle-added\"".into();
    });
    assert!(matches!(open_error(dir.path()), LogError::CorruptLog { seq: 3, .. }));
}

#[test]
fn a_semantically_invalid_record_halts_startup() {
    let dir = tempfile::tempdir().unwrap();
    busy_world(dir.path(), options());
    rewrite_log(dir.path(), |lines| {
        let last = lines.len();
        lines.push(format!(
            "{{\"seq\":{},\"ts\":0,\"kind\":\"provider-approved\",\"payload\":{{\"providerId\":\"P424242\"}}}}",
            last + 1
        ));
    });
    assert!(matches!(open_error(dir.path()), LogError::CorruptLog { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn replay_equals_live_for_random_workloads(ops in prop::collection::vec(0u8..5, 1..25)) {
        let dir = tempfile::tempdir().unwrap();
        let w = World::on_disk(dir.path(), options());
        let (_, prov) = w.provider("prov");
        let (_, cust) = w.customer("cust");
        for (i, op) in ops.iter().enumerate() {
            w.clock.advance(1_000);
            match op {
                0 => {
                    w.vehicle(&prov, "van", 100 + i as u64, (18.5 + i as f64 * 0.001, 73.8));
                }
                1 => {
                    w.driver(&prov, &format!("drv-{i}"));
                }
                2 => {
                    w.customer(&format!("cust-{i}"));
                }
                3 => {
                    let _ = w.request(&cust, (18.5, 73.8), (18.51 + i as f64 * 0.001, 73.81), "van");
                }
                _ => {
                    let (_, other) = w.provider(&format!("prov-{i}"));
                    w.vehicle(&other, "truck-small", 90, (18.4, 73.7));
                }
            }
        }
        let live = w.svc.canonical_state();
        prop_assert_eq!(replay_dir(dir.path()).unwrap().canonical_bytes(), live);
    }
}
