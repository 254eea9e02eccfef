//! Every mutation is an event; reopening a data directory replays the log
//! into an identical state.

use std::sync::Arc;

use fleetline::clock::ManualClock;
use fleetline::events::{read_log, LOG_FILE};
use fleetline::service::Registration;
use fleetline::{Service, ServiceOptions};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let opts = || ServiceOptions {
        qr_passphrase: None,
        admin_password: Some("admin-secret".into()),
        snapshot_every: Some(3),
    };
    let clock = Arc::new(ManualClock::new(1_767_225_600_000));
    let svc = Service::open(dir.path(), opts(), clock.clone()).unwrap();
    for i in 0..5 {
        clock.advance(1_000);
        svc.register_customer(&Registration {
            name: format!("Customer {i}"),
            login: format!("customer{i}"),
            password: "pw-customer".into(),
        })
        .unwrap();
    }
    let before = svc.canonical_state();
    drop(svc);

    let log = read_log(&dir.path().join(LOG_FILE)).unwrap();
    for rec in &log {
        println!("#{} {} {}", rec.seq, rec.ts, rec.event.kind());
    }
    let reopened = Service::open(dir.path(), opts(), clock).unwrap();
    println!("replayed to seq {}, identical: {}", reopened.seq(), reopened.canonical_state() == before);
}
