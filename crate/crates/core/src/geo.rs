//! Spherical-earth geometry: great-circle distances, track lengths and
//! planar interpolation along a route.
//!
//! Coordinates are validated once, when a [`GeoPoint`] is built. Every
//! function here is pure and can be called from any thread.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in kilometres (IUGG mean radius R1).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid coordinate: lat={lat}, lon={lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("track timestamps must strictly increase (index {index})")]
    NonMonotonicTrack { index: usize },
    #[error("polyline needs at least two points and no repeated consecutive points")]
    DegeneratePolyline,
    #[error("fraction {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// A WGS-84 latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let ok = lat.is_finite()
            && lon.is_finite()
            && (-90.0..=90.0).contains(&lat)
            && (-180.0..=180.0).contains(&lon);
        if ok {
            Ok(Self { lat, lon })
        } else {
            Err(GeoError::InvalidCoordinate { lat, lon })
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

impl<'de> Deserialize<'de> for GeoPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lat: f64,
            lon: f64,
        }
        let raw = Raw::deserialize(d)?;
        GeoPoint::new(raw.lat, raw.lon).map_err(serde::de::Error::custom)
    }
}

/// A timestamped fix, milliseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub point: GeoPoint,
    pub timestamp: u64,
}

/// An ordered route with at least two points and no repeated neighbours.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    points: Vec<GeoPoint>,
}

impl Polyline {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if points.len() < 2 || points.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeoError::DegeneratePolyline);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn start(&self) -> GeoPoint {
        self.points[0]
    }

    pub fn end(&self) -> GeoPoint {
        self.points[self.points.len() - 1]
    }

    /// Sum of great-circle segment lengths.
    pub fn length_km(&self) -> f64 {
        self.points.windows(2).map(|w| haversine_km(w[0], w[1])).sum()
    }
}

impl<'de> Deserialize<'de> for Polyline {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<GeoPoint>,
        }
        let raw = Raw::deserialize(d)?;
        Polyline::new(raw.points).map_err(serde::de::Error::custom)
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    // rounding can push h a hair past 1 for antipodal points
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Length of a recorded track. Tracks shorter than two points have length 0.
pub fn route_length_km(track: &[TrackPoint]) -> Result<f64, GeoError> {
    if let Some(i) = track.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
        return Err(GeoError::NonMonotonicTrack { index: i + 1 });
    }
    Ok(track
        .windows(2)
        .map(|w| haversine_km(w[0].point, w[1].point))
        .sum())
}

/// Point at `fraction` of the path's length, linear in lat/lon within the
/// segment that contains it.
pub fn interpolate_along(path: &Polyline, fraction: f64) -> Result<GeoPoint, GeoError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(GeoError::OutOfRange(fraction));
    }
    if fraction == 0.0 {
        return Ok(path.start());
    }
    if fraction == 1.0 {
        return Ok(path.end());
    }
    let seg_lengths: Vec<f64> = path
        .points
        .windows(2)
        .map(|w| haversine_km(w[0], w[1]))
        .collect();
    let total: f64 = seg_lengths.iter().sum();
    let target = fraction * total;

    let mut walked = 0.0;
    for (i, &len) in seg_lengths.iter().enumerate() {
        if walked + len >= target {
            let t = if len > 0.0 { (target - walked) / len } else { 0.0 };
            let (a, b) = (path.points[i], path.points[i + 1]);
            return Ok(GeoPoint {
                lat: a.lat + (b.lat - a.lat) * t,
                lon: a.lon + (b.lon - a.lon) * t,
            });
        }
        walked += len;
    }
    Ok(path.end())
}
