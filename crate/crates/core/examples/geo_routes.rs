//! Great-circle distances, route lengths and the wrong-location query.

use fleetline_core::geo::{haversine_km, interpolate_along, GeoPoint, Polyline};

fn main() {
    let pune = GeoPoint::new(18.5204, 73.8567).unwrap();
    let mumbai = GeoPoint::new(19.0760, 72.8777).unwrap();
    println!("Pune to Mumbai: {:.2} km", haversine_km(pune, mumbai));

    let lonavala = GeoPoint::new(18.7546, 73.4062).unwrap();
    let route = Polyline::new(vec![pune, lonavala, mumbai]).unwrap();
    println!("via Lonavala: {:.2} km", route.length_km());
    let midway = interpolate_along(&route, 0.5).unwrap();
    println!("halfway: ({:.4}, {:.4})", midway.lat(), midway.lon());

    match GeoPoint::new(95.0, 73.0) {
        Ok(_) => unreachable!(),
        Err(e) => println!("lat 95: {e}"),
    }
}
