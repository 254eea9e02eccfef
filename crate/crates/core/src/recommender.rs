//! User-based collaborative filtering with Euclidean similarity, blended with
//! cost and proximity to rank vehicles for a customer.
//!
//! Distances are taken over co-rated vehicles only; two customers without a
//! common vehicle have no similarity at all rather than a fabricated one.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_km, GeoPoint};
use crate::ids::{CustomerId, VehicleId};

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;
pub const DEFAULT_NEIGHBORS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("rating {0} outside [1, 5]")]
    InvalidRating(f64),
    #[error("unknown customer {0}")]
    UnknownCustomer(CustomerId),
    #[error("customers share no rated vehicle")]
    NoOverlap,
    #[error("no ratings available for vehicle {0}")]
    ColdStart(VehicleId),
    #[error("invalid location: lat={lat}, lon={lon}")]
    InvalidLocation { lat: f64, lon: f64 },
    #[error("no vehicle passes the filters")]
    EmptyFleet,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

type Rows = BTreeMap<CustomerId, BTreeMap<VehicleId, f64>>;

/// Sparse customer x vehicle ratings. Re-rating a pair replaces the old value.
/// Serializes as a map of customer to their ratings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Rows", into = "Rows")]
pub struct RatingMatrix {
    by_customer: Rows,
    by_vehicle: BTreeMap<VehicleId, BTreeMap<CustomerId, f64>>,
}

impl RatingMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        customer: CustomerId,
        vehicle: VehicleId,
        rating: f64,
    ) -> Result<(), RecommendError> {
        if !(MIN_RATING..=MAX_RATING).contains(&rating) {
            return Err(RecommendError::InvalidRating(rating));
        }
        self.by_vehicle
            .entry(vehicle.clone())
            .or_default()
            .insert(customer.clone(), rating);
        self.by_customer
            .entry(customer)
            .or_default()
            .insert(vehicle, rating);
        Ok(())
    }

    pub fn get(&self, customer: &CustomerId, vehicle: &VehicleId) -> Option<f64> {
        self.by_customer.get(customer)?.get(vehicle).copied()
    }

    pub fn customers(&self) -> impl Iterator<Item = &CustomerId> {
        self.by_customer.keys()
    }

    pub fn ratings_of(&self, customer: &CustomerId) -> Option<&BTreeMap<VehicleId, f64>> {
        self.by_customer.get(customer)
    }

    pub fn raters_of(&self, vehicle: &VehicleId) -> Option<&BTreeMap<CustomerId, f64>> {
        self.by_vehicle.get(vehicle)
    }

    pub fn len(&self) -> usize {
        self.by_customer.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_customer.is_empty()
    }

    fn vehicle_mean(&self, vehicle: &VehicleId) -> Option<f64> {
        let raters = self.by_vehicle.get(vehicle)?;
        (!raters.is_empty()).then(|| raters.values().sum::<f64>() / raters.len() as f64)
    }
}

/// Square root of summed squared differences over co-rated vehicles.
pub fn euclidean_distance(
    m: &RatingMatrix,
    u: &CustomerId,
    v: &CustomerId,
) -> Result<f64, RecommendError> {
    let ru = m
        .ratings_of(u)
        .ok_or_else(|| RecommendError::UnknownCustomer(u.clone()))?;
    let rv = m
        .ratings_of(v)
        .ok_or_else(|| RecommendError::UnknownCustomer(v.clone()))?;
    co_rated_distance(ru, rv).ok_or(RecommendError::NoOverlap)
}

fn co_rated_distance(
    a: &BTreeMap<VehicleId, f64>,
    b: &BTreeMap<VehicleId, f64>,
) -> Option<f64> {
    let mut overlap = false;
    let mut sum = 0.0;
    for (vehicle, ra) in a {
        if let Some(rb) = b.get(vehicle) {
            overlap = true;
            sum += (ra - rb).powi(2);
        }
    }
    overlap.then(|| sum.sqrt())
}

impl TryFrom<Rows> for RatingMatrix {
    type Error = RecommendError;

    fn try_from(rows: Rows) -> Result<Self, RecommendError> {
        let mut m = RatingMatrix::new();
        for (c, row) in rows {
            for (v, r) in row {
                m.insert(c.clone(), v, r)?;
            }
        }
        Ok(m)
    }
}

impl From<RatingMatrix> for Rows {
    fn from(m: RatingMatrix) -> Rows {
        m.by_customer
    }
}

/// 1 / (1 + distance), in (0, 1].
pub fn similarity(m: &RatingMatrix, u: &CustomerId, v: &CustomerId) -> Result<f64, RecommendError> {
    euclidean_distance(m, u, v).map(|d| 1.0 / (1.0 + d))
}

/// Similarities between one customer and everybody sharing a rated vehicle
/// with them; computed once per query and reused for every candidate.
struct Neighbourhood<'a> {
    matrix: &'a RatingMatrix,
    target: &'a CustomerId,
    similarity: BTreeMap<&'a CustomerId, f64>,
}

impl<'a> Neighbourhood<'a> {
    fn new(matrix: &'a RatingMatrix, target: &'a CustomerId) -> Self {
        let mut similarity = BTreeMap::new();
        if let Some(own) = matrix.ratings_of(target) {
            for (other, theirs) in &matrix.by_customer {
                if other == target {
                    continue;
                }
                if let Some(d) = co_rated_distance(own, theirs) {
                    similarity.insert(other, 1.0 / (1.0 + d));
                }
            }
        }
        Self {
            matrix,
            target,
            similarity,
        }
    }

    fn predict(&self, vehicle: &VehicleId, k: usize) -> Result<f64, RecommendError> {
        let mut neighbours: Vec<(&CustomerId, f64, f64)> = self
            .matrix
            .raters_of(vehicle)
            .into_iter()
            .flatten()
            .filter(|(c, _)| *c != self.target)
            .filter_map(|(c, &r)| self.similarity.get(c).map(|&s| (c, s, r)))
            .collect();
        neighbours.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        neighbours.truncate(k);

        let predicted = if neighbours.is_empty() {
            self.matrix
                .vehicle_mean(vehicle)
                .ok_or_else(|| RecommendError::ColdStart(vehicle.clone()))?
        } else {
            let weight: f64 = neighbours.iter().map(|n| n.1).sum();
            neighbours.iter().map(|n| n.1 * n.2).sum::<f64>() / weight
        };
        Ok(predicted.clamp(MIN_RATING, MAX_RATING))
    }
}

/// Similarity-weighted mean over the `k` most similar customers who rated
/// `vehicle` (ties by ascending id), falling back to the vehicle's mean.
pub fn predict_rating(
    m: &RatingMatrix,
    customer: &CustomerId,
    vehicle: &VehicleId,
    k: usize,
) -> Result<f64, RecommendError> {
    if k == 0 {
        return Err(RecommendError::InvalidParam("k must be at least 1".into()));
    }
    Neighbourhood::new(m, customer).predict(vehicle, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationQuery {
    pub customer_id: CustomerId,
    pub location: GeoPoint,
    pub max_cost_per_km: Option<f64>,
    pub vehicle_type: Option<String>,
    pub k_neighbors: usize,
}

impl RecommendationQuery {
    /// Out-of-range coordinates are the "wrong location" query and fail here.
    pub fn new(customer_id: CustomerId, lat: f64, lon: f64) -> Result<Self, RecommendError> {
        let location =
            GeoPoint::new(lat, lon).map_err(|_| RecommendError::InvalidLocation { lat, lon })?;
        Ok(Self {
            customer_id,
            location,
            max_cost_per_km: None,
            vehicle_type: None,
            k_neighbors: DEFAULT_NEIGHBORS,
        })
    }

    pub fn vehicle_type(mut self, t: impl Into<String>) -> Self {
        self.vehicle_type = Some(t.into());
        self
    }

    pub fn max_cost_per_km(mut self, c: f64) -> Self {
        self.max_cost_per_km = Some(c);
        self
    }

    pub fn k_neighbors(mut self, k: usize) -> Self {
        self.k_neighbors = k;
        self
    }
}

/// A vehicle offered to the recommender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetCandidate {
    pub vehicle_id: VehicleId,
    pub vehicle_type: String,
    pub location: GeoPoint,
    pub cost_per_km: f64,
    pub available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub vehicle_id: VehicleId,
    pub score: f64,
    /// `None` when the vehicle has no ratings at all (cold start).
    pub predicted_rating: Option<f64>,
    pub distance_km: f64,
    pub cost_per_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub rating: f64,
    pub cost: f64,
    pub distance: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            rating: 0.5,
            cost: 0.25,
            distance: 0.25,
        }
    }
}

impl ScoreWeights {
    pub fn new(rating: f64, cost: f64, distance: f64) -> Result<Self, RecommendError> {
        let w = [rating, cost, distance];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || ((rating + cost + distance) - 1.0).abs() > 1e-9 {
            return Err(RecommendError::InvalidParam(
                "weights must be non-negative and sum to 1".into(),
            ));
        }
        Ok(Self {
            rating,
            cost,
            distance,
        })
    }
}

pub fn recommend(
    m: &RatingMatrix,
    q: &RecommendationQuery,
    fleet: &[FleetCandidate],
) -> Result<Vec<Recommendation>, RecommendError> {
    recommend_with(m, q, fleet, ScoreWeights::default())
}

/// Rank the vehicles that pass the query's filters. Cost and distance are
/// min-max normalized over the surviving candidates; a cold-start vehicle
/// gets the neutral rating term 0.5.
pub fn recommend_with(
    m: &RatingMatrix,
    q: &RecommendationQuery,
    fleet: &[FleetCandidate],
    weights: ScoreWeights,
) -> Result<Vec<Recommendation>, RecommendError> {
    if q.k_neighbors == 0 {
        return Err(RecommendError::InvalidParam("k must be at least 1".into()));
    }
    if let Some(bad) = fleet
        .iter()
        .find(|c| !(c.cost_per_km.is_finite() && c.cost_per_km > 0.0))
    {
        return Err(RecommendError::InvalidParam(format!(
            "vehicle {} has non-positive cost",
            bad.vehicle_id
        )));
    }

    let candidates: Vec<(&FleetCandidate, f64)> = fleet
        .iter()
        .filter(|c| c.available)
        .filter(|c| q.vehicle_type.as_ref().is_none_or(|t| *t == c.vehicle_type))
        .filter(|c| q.max_cost_per_km.is_none_or(|max| c.cost_per_km <= max))
        .map(|c| (c, haversine_km(q.location, c.location)))
        .collect();
    if candidates.is_empty() {
        return Err(RecommendError::EmptyFleet);
    }

    let cost_range = min_max(candidates.iter().map(|(c, _)| c.cost_per_km));
    let dist_range = min_max(candidates.iter().map(|(_, d)| *d));
    let hood = Neighbourhood::new(m, &q.customer_id);

    let mut out = Vec::with_capacity(candidates.len());
    for (c, dist) in candidates {
        let predicted = match hood.predict(&c.vehicle_id, q.k_neighbors) {
            Ok(r) => Some(r),
            Err(RecommendError::ColdStart(_)) => None,
            Err(e) => return Err(e),
        };
        let rating_term = predicted.map_or(0.5, |r| (r - MIN_RATING) / (MAX_RATING - MIN_RATING));
        let score = weights.rating * rating_term
            + weights.cost * (1.0 - normalize(c.cost_per_km, cost_range))
            + weights.distance * (1.0 - normalize(dist, dist_range));
        out.push(Recommendation {
            vehicle_id: c.vehicle_id.clone(),
            score,
            predicted_rating: predicted,
            distance_km: dist,
            cost_per_km: c.cost_per_km,
        });
    }
    out.sort_by(rank_order);
    Ok(out)
}

fn rank_order(a: &Recommendation, b: &Recommendation) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.vehicle_id.cmp(&b.vehicle_id))
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Min-max normalization; a degenerate range maps everything to 0.
fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}
