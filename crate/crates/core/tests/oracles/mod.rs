//! Slow, straightforward reference implementations used to cross-check the
//! library. They share no code with it beyond plain data types and
//! `haversine_km`.

#![allow(dead_code)]

use fleetline_core::geo::{haversine_km, GeoPoint};

/// Ratings as a flat list of (customer, vehicle, rating) with unique pairs.
pub type Flat = Vec<(String, String, f64)>;

fn rating(flat: &Flat, c: &str, v: &str) -> Option<f64> {
    flat.iter().find(|(fc, fv, _)| fc == c && fv == v).map(|t| t.2)
}

fn vehicles_of(flat: &Flat, c: &str) -> Vec<String> {
    flat.iter().filter(|t| t.0 == c).map(|t| t.1.clone()).collect()
}

pub fn similarity(flat: &Flat, a: &str, b: &str) -> Option<f64> {
    let mut sq = 0.0;
    let mut any = false;
    for v in vehicles_of(flat, a) {
        if let Some(rb) = rating(flat, b, &v) {
            any = true;
            let ra = rating(flat, a, &v).unwrap();
            sq += (ra - rb) * (ra - rb);
        }
    }
    any.then(|| 1.0 / (1.0 + sq.sqrt()))
}

/// `None` is the cold-start case.
pub fn predict(flat: &Flat, customer: &str, vehicle: &str, k: usize) -> Option<f64> {
    let mut raters: Vec<(String, f64)> = flat
        .iter()
        .filter(|t| t.1 == vehicle && t.0 != customer)
        .map(|t| (t.0.clone(), t.2))
        .collect();
    raters.sort_by(|a, b| a.0.cmp(&b.0));

    let mut scored: Vec<(f64, String, f64)> = Vec::new();
    for (c, r) in raters {
        if let Some(s) = similarity(flat, customer, &c) {
            scored.push((s, c, r));
        }
    }
    // selection by repeated maximum: highest similarity, lowest id
    let mut chosen = Vec::new();
    while chosen.len() < k && !scored.is_empty() {
        let mut best = 0;
        for i in 1..scored.len() {
            let (si, ci) = (scored[i].0, &scored[i].1);
            let (sb, cb) = (scored[best].0, &scored[best].1);
            if si > sb || (si == sb && ci < cb) {
                best = i;
            }
        }
        chosen.push(scored.remove(best));
    }

    let value = if chosen.is_empty() {
        let all: Vec<f64> = flat.iter().filter(|t| t.1 == vehicle).map(|t| t.2).collect();
        if all.is_empty() {
            return None;
        }
        all.iter().sum::<f64>() / all.len() as f64
    } else {
        let num: f64 = chosen.iter().map(|(s, _, r)| s * r).sum();
        let den: f64 = chosen.iter().map(|(s, _, _)| s).sum();
        num / den
    };
    Some(value.clamp(1.0, 5.0))
}

pub struct Candidate {
    pub id: String,
    pub kind: String,
    pub at: GeoPoint,
    pub cost: f64,
    pub available: bool,
}

/// Scores for every candidate passing the filters, best first.
pub fn recommend(
    flat: &Flat,
    customer: &str,
    at: GeoPoint,
    kind: Option<&str>,
    max_cost: Option<f64>,
    k: usize,
    fleet: &[Candidate],
) -> Vec<(String, f64)> {
    let pass: Vec<&Candidate> = fleet
        .iter()
        .filter(|c| c.available)
        .filter(|c| kind.is_none_or(|k| c.kind == k))
        .filter(|c| max_cost.is_none_or(|m| c.cost <= m))
        .collect();
    if pass.is_empty() {
        return Vec::new();
    }
    let dists: Vec<f64> = pass.iter().map(|c| haversine_km(at, c.at)).collect();
    let costs: Vec<f64> = pass.iter().map(|c| c.cost).collect();
    let norm = |xs: &[f64], x: f64| {
        let lo = xs.iter().cloned().fold(f64::MAX, f64::min);
        let hi = xs.iter().cloned().fold(f64::MIN, f64::max);
        if hi == lo {
            0.0
        } else {
            (x - lo) / (hi - lo)
        }
    };
    let mut out: Vec<(String, f64)> = pass
        .iter()
        .zip(&dists)
        .map(|(c, &d)| {
            let r = predict(flat, customer, &c.id, k).map_or(0.5, |p| (p - 1.0) / 4.0);
            let s = 0.5 * r + 0.25 * (1.0 - norm(&costs, c.cost)) + 0.25 * (1.0 - norm(&dists, d));
            (c.id.clone(), s)
        })
        .collect();
    // insertion sort, score desc then id asc
    for i in 1..out.len() {
        let mut j = i;
        while j > 0 {
            let (a, b) = (&out[j - 1], &out[j]);
            let swap = b.1 > a.1 || (b.1 == a.1 && b.0 < a.0);
            if !swap {
                break;
            }
            out.swap(j - 1, j);
            j -= 1;
        }
    }
    out
}

pub struct FleetEntry {
    pub id: String,
    pub provider: String,
    pub kind: String,
    pub available: bool,
    pub home: GeoPoint,
    pub tracked: Option<GeoPoint>,
}

pub struct DriverEntry {
    pub id: String,
    pub provider: String,
    pub free: bool,
}

#[derive(Debug, PartialEq)]
pub enum Verdict {
    Accepted(String, String),
    NoVehicle,
    NoDriver,
}

/// Scan every vehicle; keep the best one whose provider has a free driver.
pub fn allocate(
    pickup: GeoPoint,
    kind: &str,
    radius_km: f64,
    fleet: &[FleetEntry],
    drivers: &[DriverEntry],
) -> Verdict {
    let mut any_in_range = false;
    let mut best: Option<(f64, &str, &str)> = None;
    for v in fleet {
        if !v.available || v.kind != kind {
            continue;
        }
        let d = haversine_km(v.tracked.unwrap_or(v.home), pickup);
        if d > radius_km {
            continue;
        }
        any_in_range = true;
        let mut driver: Option<&str> = None;
        for dr in drivers {
            if dr.free && dr.provider == v.provider && driver.is_none_or(|cur| dr.id.as_str() < cur) {
                driver = Some(&dr.id);
            }
        }
        let Some(driver) = driver else { continue };
        let better = match best {
            None => true,
            Some((bd, bid, _)) => d < bd || (d == bd && v.id.as_str() < bid),
        };
        if better {
            best = Some((d, &v.id, driver));
        }
    }
    match best {
        Some((_, v, d)) => Verdict::Accepted(v.to_string(), d.to_string()),
        None if any_in_range => Verdict::NoDriver,
        None => Verdict::NoVehicle,
    }
}

/// Pairwise check over half-open intervals: two intervals overlap iff their
/// intersection is non-empty.
pub fn any_overlap(intervals: &[(u64, u64)]) -> bool {
    for i in 0..intervals.len() {
        for j in i + 1..intervals.len() {
            let (a, b) = (intervals[i], intervals[j]);
            if a.0.max(b.0) < a.1.min(b.1) {
                return true;
            }
        }
    }
    false
}

/// Provider order by f64 mean desc, count desc, id asc; unreviewed last.
pub fn rank(providers: &[(String, Vec<u8>)]) -> Vec<String> {
    let mut rows: Vec<(String, Option<f64>, usize)> = providers
        .iter()
        .map(|(p, s)| {
            let mean = (!s.is_empty()).then(|| s.iter().map(|&x| x as f64).sum::<f64>() / s.len() as f64);
            (p.clone(), mean, s.len())
        })
        .collect();
    rows.sort_by(|a, b| match (a.1, b.1) {
        (None, None) => a.0.cmp(&b.0),
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (Some(_), None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => y
            .partial_cmp(&x)
            .unwrap()
            .then(b.2.cmp(&a.2))
            .then(a.0.cmp(&b.0)),
    });
    rows.into_iter().map(|r| r.0).collect()
}
