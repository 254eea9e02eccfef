//! Nearest-vehicle allocation, trip pricing and a driver schedule.

use fleetline_core::dispatch::{
    allocate, build_schedule, fuel_usage, trip_cost, Driver, DriverStatus, FleetView, Km, RatePerKm,
    ScheduleItem, ScheduleOwner, TripRequest, Vehicle, VehicleStatus,
};
use fleetline_core::geo::GeoPoint;
use fleetline_core::ids::{CustomerId, DriverId, ProviderId, RequestId, TripId, VehicleId};

fn main() {
    let vehicle = |id: &str, provider: &str, lat: f64| Vehicle {
        vehicle_id: VehicleId::new(id),
        provider_id: ProviderId::new(provider),
        vehicle_type: "van".into(),
        cost_per_km: RatePerKm::new(400).unwrap(),
        home_location: GeoPoint::new(lat, 73.85).unwrap(),
        status: VehicleStatus::Available,
    };
    let vehicles = [vehicle("V1", "P1", 18.60), vehicle("V2", "P2", 18.53), vehicle("V3", "P3", 18.52)];
    let fleet: Vec<FleetView> = vehicles.iter().map(|v| FleetView { vehicle: v, position: None }).collect();
    let drivers = [
        Driver { driver_id: DriverId::new("D1"), provider_id: ProviderId::new("P1"), name: "Asha".into(), status: DriverStatus::Free },
        Driver { driver_id: DriverId::new("D2"), provider_id: ProviderId::new("P2"), name: "Ravi".into(), status: DriverStatus::Free },
    ];
    let request = TripRequest::new(
        RequestId::new("Q1"),
        CustomerId::new("C1"),
        GeoPoint::new(18.52, 73.85).unwrap(),
        GeoPoint::new(18.64, 73.85).unwrap(),
        "van",
        0,
        50.0,
        0,
    )
    .unwrap();
    // V3 is nearest but its provider has no driver
    println!("{:?}", allocate(&request, &fleet, &drivers).unwrap());

    let dr = Km::from_km(12.5).unwrap();
    let cost = trip_cost(dr, RatePerKm::new(400).unwrap()).unwrap();
    println!("C_t = {dr} km x 4.00 = {:.2}", cost.as_major());
    println!("F_u = C_t x Dr = {:.3}", fuel_usage(cost, dr).as_major_km());

    let items = [
        ScheduleItem { trip_id: TripId::new("T1"), start_ms: 0, dr },
        ScheduleItem { trip_id: TripId::new("T2"), start_ms: 3_600_000, dr },
    ];
    let schedule = build_schedule(ScheduleOwner::Driver(DriverId::new("D2")), items.clone()).unwrap();
    for e in &schedule.entries {
        println!("{} {}..{}", e.trip_id, e.start_ms, e.end_ms);
    }
    let clash = ScheduleItem { trip_id: TripId::new("T3"), start_ms: 600_000, dr };
    let err = build_schedule(ScheduleOwner::Driver(DriverId::new("D2")), items.into_iter().chain([clash])).unwrap_err();
    println!("{err}");
}
