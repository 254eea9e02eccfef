use std::sync::Arc;
use std::thread;

use fleetline_core::geo::{route_length_km, GeoPoint, Polyline, EARTH_RADIUS_KM};
use fleetline_core::ids::VehicleId;
use fleetline_core::tracking::{simulate_transmitter, IngestOutcome, TelemetryMsg, TrackStore, TransmitterConfig};
use proptest::prelude::*;

fn msgs(n: u64) -> Vec<TelemetryMsg> {
    (1..=n)
        .map(|i| TelemetryMsg {
            vehicle_id: VehicleId::new("V1"),
            point: GeoPoint::new(i as f64 * 0.001, 0.0).unwrap(),
            timestamp: i * 1000,
            seq: i,
        })
        .collect()
}

proptest! {
    #[test]
    fn replaying_a_prefix_changes_nothing(n in 1u64..60, cut in 0usize..60) {
        let log = msgs(n);
        let once = TrackStore::new();
        log.iter().for_each(|m| { once.ingest(m); });
        let twice = TrackStore::new();
        log.iter().for_each(|m| { twice.ingest(m); });
        for m in &log[..cut.min(log.len())] {
            prop_assert_eq!(twice.ingest(m), IngestOutcome::RejectedStale);
        }
        prop_assert_eq!(once.snapshot(), twice.snapshot());
    }

    #[test]
    fn adversarial_order_keeps_tracks_monotone(order in Just((1..=40u64).collect::<Vec<_>>()).prop_shuffle(), dup in prop::collection::vec(0usize..40, 0..20)) {
        let log = msgs(40);
        let store = TrackStore::new();
        for &i in order.iter().chain(dup.iter().map(|d| &order[*d])) {
            store.ingest(&log[i as usize - 1]);
        }
        let t = store.track(&VehicleId::new("V1")).unwrap();
        let pts = t.to_points();
        prop_assert!(pts.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        prop_assert!(route_length_km(&pts).is_ok());
        prop_assert_eq!(t.last_seq().unwrap(), *order.iter().max().unwrap().max(order.first().unwrap()));
    }

    #[test]
    fn simulated_drive_length_is_faithful(km in 0.5f64..40.0, bend in -0.08f64..0.08, speed in 10.0f64..120.0, interval in 5_000u64..120_000) {
        let dlat = km / (EARTH_RADIUS_KM * std::f64::consts::PI / 180.0);
        let path = Polyline::new(vec![
            GeoPoint::new(0.0, 0.0).unwrap(),
            GeoPoint::new(dlat / 2.0, bend * dlat).unwrap(),
            GeoPoint::new(dlat, 0.0).unwrap(),
        ]).unwrap();
        // fixes are not emitted at vertices, so each bend cuts a corner; the
        // bound holds while the sampling step is short next to the path
        let step = speed * interval as f64 / 3_600_000.0;
        prop_assume!(step <= path.length_km() / 20.0);
        let v = VehicleId::new("V1");
        let out = simulate_transmitter(&v, &path, TransmitterConfig::new(speed, interval, 0)).unwrap();
        prop_assert_eq!(out.first().unwrap().point, path.start());
        prop_assert_eq!(out.last().unwrap().point, path.end());
        prop_assert!(out.len() as f64 <= (path.length_km() / step).floor() + 2.0);
        let store = TrackStore::new();
        for m in &out {
            prop_assert_eq!(store.ingest(m), IngestOutcome::Accepted);
        }
        let len = store.track(&v).unwrap().length_km();
        prop_assert!((len - path.length_km()).abs() <= path.length_km() * 1e-3);
    }
}

#[test]
fn readers_see_the_latest_accepted_fix_under_concurrency() {
    let store = Arc::new(TrackStore::new());
    let writers: Vec<_> = (0..4)
        .map(|w| {
            let store = Arc::clone(&store);
            thread::spawn(move || {
                let v = VehicleId::new(format!("V{w}"));
                for i in 1..=2_000u64 {
                    let m = TelemetryMsg { vehicle_id: v.clone(), point: GeoPoint::new(0.0, i as f64 * 1e-4).unwrap(), timestamp: i, seq: i };
                    assert_eq!(store.ingest(&m), IngestOutcome::Accepted);
                    // our own write is visible immediately
                    assert_eq!(store.current_position(&v).unwrap().timestamp, i);
                }
            })
        })
        .collect();
    let reader = {
        let store = Arc::clone(&store);
        thread::spawn(move || {
            let mut last = [0u64; 4];
            for _ in 0..5_000 {
                for (w, seen) in last.iter_mut().enumerate() {
                    let v = VehicleId::new(format!("V{w}"));
                    if let Some(t) = store.track(&v) {
                        let pts = t.to_points();
                        // a consistent snapshot: contiguous 1..=n
                        assert!(pts.iter().enumerate().all(|(i, p)| p.timestamp == i as u64 + 1));
                        assert!(pts.len() as u64 >= *seen);
                        *seen = pts.len() as u64;
                    }
                }
            }
        })
    };
    for w in writers {
        w.join().unwrap();
    }
    reader.join().unwrap();
    for w in 0..4 {
        assert_eq!(store.current_position(&VehicleId::new(format!("V{w}"))).unwrap().timestamp, 2_000);
    }
}
