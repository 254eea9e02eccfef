mod oracles;

use fleetline_core::dispatch::{
    allocate, build_schedule, fuel_usage, trip_cost, Allocation, Driver, DriverStatus,
    FleetView, Km, RatePerKm, RejectReason, ScheduleItem, ScheduleOwner, TripRequest, Vehicle,
    VehicleStatus,
};
use fleetline_core::geo::{haversine_km, GeoPoint};
use fleetline_core::ids::{CustomerId, DriverId, ProviderId, RequestId, TripId, VehicleId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [&str; 3] = ["van", "truck-small", "truck-large"];

struct World {
    vehicles: Vec<Vehicle>,
    tracked: Vec<Option<GeoPoint>>,
    drivers: Vec<Driver>,
}

fn random_point(rng: &mut ChaCha8Rng, spread: f64) -> GeoPoint {
    // coarse grid so equal distances (and the id tie-break) actually occur
    let q = |x: f64| (x * 100.0).round() / 100.0;
    GeoPoint::new(q(rng.random_range(-spread..spread)), q(rng.random_range(-spread..spread))).unwrap()
}

fn random_world(rng: &mut ChaCha8Rng) -> World {
    let n = rng.random_range(0..=20);
    let statuses = [VehicleStatus::Available, VehicleStatus::Available, VehicleStatus::Reserved, VehicleStatus::OutOfService];
    let vehicles: Vec<Vehicle> = (0..n)
        .map(|i| Vehicle {
            vehicle_id: VehicleId::new(format!("V{:02}", rng.random_range(0..99) * 100 + i)),
            provider_id: ProviderId::new(format!("P{}", rng.random_range(0..4))),
            vehicle_type: KINDS[rng.random_range(0..3)].into(),
            cost_per_km: RatePerKm::new(rng.random_range(1..1000)).unwrap(),
            home_location: random_point(rng, 0.6),
            status: statuses[rng.random_range(0..4)],
        })
        .collect();
    let tracked = (0..n).map(|_| rng.random_bool(0.5).then(|| random_point(rng, 0.6))).collect();
    let drivers = (0..rng.random_range(0..6))
        .map(|i| Driver {
            driver_id: DriverId::new(format!("D{}", rng.random_range(0..9) * 10 + i)),
            provider_id: ProviderId::new(format!("P{}", rng.random_range(0..4))),
            name: format!("driver {i}"),
            status: if rng.random_bool(0.7) { DriverStatus::Free } else { DriverStatus::Assigned },
        })
        .collect();
    World { vehicles, tracked, drivers }
}

#[test]
fn allocation_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..500 {
        let w = random_world(&mut rng);
        let pickup = random_point(&mut rng, 0.3);
        let kind = KINDS[rng.random_range(0..3)];
        let radius = rng.random_range(5.0..80.0);
        let request = TripRequest::new(
            RequestId::new("Q"),
            CustomerId::new("C"),
            pickup,
            GeoPoint::new(45.0, 45.0).unwrap(),
            kind,
            0,
            radius,
            0,
        )
        .unwrap();
        let views: Vec<FleetView> = w.vehicles.iter().zip(&w.tracked).map(|(v, &p)| FleetView { vehicle: v, position: p }).collect();
        let got = allocate(&request, &views, &w.drivers).unwrap();

        let fleet: Vec<oracles::FleetEntry> = w
            .vehicles
            .iter()
            .zip(&w.tracked)
            .map(|(v, &t)| oracles::FleetEntry {
                id: v.vehicle_id.0.clone(),
                provider: v.provider_id.0.clone(),
                kind: v.vehicle_type.clone(),
                available: v.status == VehicleStatus::Available,
                home: v.home_location,
                tracked: t,
            })
            .collect();
        let drivers: Vec<oracles::DriverEntry> = w
            .drivers
            .iter()
            .map(|d| oracles::DriverEntry { id: d.driver_id.0.clone(), provider: d.provider_id.0.clone(), free: d.status == DriverStatus::Free })
            .collect();
        let want = oracles::allocate(pickup, kind, radius, &fleet, &drivers);
        let got_verdict = match &got {
            Allocation::Accepted { vehicle_id, driver_id, .. } => oracles::Verdict::Accepted(vehicle_id.0.clone(), driver_id.0.clone()),
            Allocation::Rejected { reason: RejectReason::NoVehicle } => oracles::Verdict::NoVehicle,
            Allocation::Rejected { reason: RejectReason::NoDriver } => oracles::Verdict::NoDriver,
        };
        assert_eq!(got_verdict, want);

        if let Allocation::Accepted { vehicle_id, .. } = got {
            let (v, t) = w.vehicles.iter().zip(&w.tracked).find(|(v, _)| v.vehicle_id == vehicle_id).unwrap();
            assert_eq!(v.vehicle_type, kind);
            assert!(haversine_km(t.unwrap_or(v.home_location), pickup) <= radius);
        }
    }
}

#[test]
fn pricing_equations_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10_000 {
        let metres = rng.random_range(0..5_000_000u64);
        let rate = rng.random_range(1..100_000u64);
        let dr = Km::from_metres(metres);
        let c = trip_cost(dr, RatePerKm::new(rate).unwrap()).unwrap();
        assert_eq!(c.milli_minor() as u128, metres as u128 * rate as u128);
        let f = fuel_usage(c, dr);
        assert_eq!(f.raw(), c.milli_minor() as u128 * metres as u128);
        // the decimal text carries the exact value
        assert_eq!(c.to_string().replace('.', "").trim_start_matches('0'), (metres * rate).to_string().trim_start_matches('0'));
    }
}

proptest! {
    #[test]
    fn cost_is_linear(a in 0u64..1_000_000_000, b in 0u64..1_000_000_000, rate in 1u64..1_000_000) {
        let r = RatePerKm::new(rate).unwrap();
        let sum = trip_cost(Km::from_metres(a + b), r).unwrap();
        let parts = trip_cost(Km::from_metres(a), r).unwrap().checked_add(trip_cost(Km::from_metres(b), r).unwrap()).unwrap();
        prop_assert_eq!(sum, parts);
        let f = |km: f64| trip_cost(Km::from_km(km).unwrap(), r).unwrap().as_minor();
        let (x, y) = (a as f64 / 1000.0, b as f64 / 1000.0);
        prop_assert!((f(x + y) - (f(x) + f(y))).abs() <= 1e-9 * f(x + y).max(1.0));
    }

    #[test]
    fn schedule_verdict_matches_pairwise_check(
        items in prop::collection::vec((0u64..2_000_000, 0u64..20_000), 0..12),
    ) {
        let sched_items: Vec<ScheduleItem> = items
            .iter()
            .enumerate()
            .map(|(i, &(start, metres))| ScheduleItem { trip_id: TripId::new(format!("T{i:02}")), start_ms: start, dr: Km::from_metres(metres) })
            .collect();
        let intervals: Vec<(u64, u64)> = items.iter().map(|&(s, m)| (s, s + m * 90)).collect();
        let result = build_schedule(ScheduleOwner::Driver(DriverId::new("D")), sched_items);
        prop_assert_eq!(result.is_err(), oracles::any_overlap(&intervals));
        if let Ok(s) = result {
            prop_assert!(s.entries.windows(2).all(|w| w[0].start_ms <= w[1].start_ms));
        }
    }
}
