//! Paths for the transmitter simulator.

use fleetline_core::geo::{GeoError, GeoPoint, Polyline, EARTH_RADIUS_KM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The point `km` from `from` along the great circle leaving at `bearing_deg`.
pub fn destination(from: GeoPoint, bearing_deg: f64, km: f64) -> Result<GeoPoint, GeoError> {
    let d = km / EARTH_RADIUS_KM;
    let (phi1, lam1, theta) = (from.lat().to_radians(), from.lon().to_radians(), bearing_deg.to_radians());
    let phi2 = (phi1.sin() * d.cos() + phi1.cos() * d.sin() * theta.cos()).asin();
    let lam2 = lam1 + (theta.sin() * d.sin() * phi1.cos()).atan2(d.cos() - phi1.sin() * phi2.sin());
    let lon = (lam2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(phi2.to_degrees(), lon)
}

/// A gently bending path of `segments` equal great-circle legs totalling
/// `km`, chosen by `seed`.
pub fn seeded_path(seed: u64, km: f64, segments: usize) -> Result<Polyline, GeoError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = GeoPoint::new(rng.random_range(-60.0..60.0), rng.random_range(-170.0..170.0))?;
    let mut bearing: f64 = rng.random_range(0.0..360.0);
    let leg = km / segments.max(1) as f64;
    let mut points = vec![start];
    for _ in 0..segments.max(1) {
        bearing += rng.random_range(-15.0..15.0);
        let next = destination(*points.last().unwrap(), bearing, leg)?;
        points.push(next);
    }
    Polyline::new(points)
}

/// Parses `lat,lon;lat,lon;...`.
pub fn parse_path(text: &str) -> Result<Polyline, String> {
    let points = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (lat, lon) = pair
                .split_once(',')
                .ok_or_else(|| format!("expected lat,lon in {pair:?}"))?;
            let lat: f64 = lat.trim().parse().map_err(|_| format!("bad latitude {lat:?}"))?;
            let lon: f64 = lon.trim().parse().map_err(|_| format!("bad longitude {lon:?}"))?;
            GeoPoint::new(lat, lon).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Polyline::new(points).map_err(|e| e.to_string())
}
