//! Collaborative filtering over customer ratings, blended with cost and
//! distance.

use fleetline_core::geo::GeoPoint;
use fleetline_core::ids::{CustomerId, VehicleId};
use fleetline_core::recommender::{
    euclidean_distance, predict_rating, recommend, FleetCandidate, RatingMatrix, RecommendationQuery,
};

fn main() {
    let mut m = RatingMatrix::new();
    let ratings = [
        ("C1", "V1", 5.0),
        ("C1", "V2", 2.0),
        ("C2", "V1", 4.0),
        ("C2", "V2", 1.0),
        ("C2", "V3", 5.0),
        ("C3", "V2", 5.0),
        ("C3", "V3", 1.0),
    ];
    for (c, v, r) in ratings {
        m.insert(CustomerId::new(c), VehicleId::new(v), r).unwrap();
    }
    let (c1, c2) = (CustomerId::new("C1"), CustomerId::new("C2"));
    println!("d(C1, C2) = {:.4}", euclidean_distance(&m, &c1, &c2).unwrap());
    println!("C1 on V3 predicted {:.3}", predict_rating(&m, &c1, &VehicleId::new("V3"), 2).unwrap());

    let fleet: Vec<FleetCandidate> = [("V1", 18.52, 400.0), ("V2", 18.50, 250.0), ("V3", 18.60, 300.0), ("V4", 18.53, 350.0)]
        .into_iter()
        .map(|(id, lat, cost)| FleetCandidate {
            vehicle_id: VehicleId::new(id),
            vehicle_type: "van".into(),
            location: GeoPoint::new(lat, 73.85).unwrap(),
            cost_per_km: cost,
            available: true,
        })
        .collect();
    let q = RecommendationQuery::new(c1, 18.52, 73.85).unwrap().vehicle_type("van");
    for r in recommend(&m, &q, &fleet).unwrap() {
        let rating = r.predicted_rating.map_or("cold".to_string(), |p| format!("{p:.2}"));
        println!("{}  score {:.3}  rating {rating}  {:.1} km", r.vehicle_id, r.score, r.distance_km);
    }
}
