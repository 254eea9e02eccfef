//! The simulated transmitter feeding a track store.

use fleetline_core::geo::{GeoPoint, Polyline};
use fleetline_core::ids::VehicleId;
use fleetline_core::tracking::{simulate_transmitter, TrackStore, TransmitterConfig};

fn main() {
    let vehicle = VehicleId::new("V000001");
    let path = Polyline::new(vec![
        GeoPoint::new(18.5204, 73.8567).unwrap(),
        GeoPoint::new(18.5600, 73.9000).unwrap(),
        GeoPoint::new(18.6000, 73.9200).unwrap(),
    ])
    .unwrap();
    let fixes = simulate_transmitter(&vehicle, &path, TransmitterConfig::new(40.0, 15_000, 0)).unwrap();
    println!("{} fixes over {:.3} km", fixes.len(), path.length_km());

    let store = TrackStore::new();
    for f in &fixes {
        store.ingest(f);
    }
    println!("late duplicate: {:?}", store.ingest(&fixes[3]));
    let track = store.track(&vehicle).unwrap();
    println!("track {:.3} km, {} points", track.length_km(), track.len());
    let now = store.current_position(&vehicle).unwrap();
    println!("last fix ({:.5}, {:.5}) at {} ms", now.point.lat(), now.point.lon(), now.timestamp);
}
