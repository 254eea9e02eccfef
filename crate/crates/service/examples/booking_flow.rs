//! A booking driven through the HTTP router in-process: registration,
//! allocation, telemetry, completion, payment, review and the trip QR.

use std::sync::Arc;

use fleetline::clock::ManualClock;
use fleetline::http::router;
use fleetline::local::LocalApi;
use fleetline::{Service, ServiceOptions};
use fleetline_core::geo::{GeoPoint, Polyline};
use fleetline_core::qr::QrMatrix;
use fleetline_core::tracking::{simulate_transmitter, TransmitterConfig};
use fleetline_core::trip_qr::open_trip_qr;
use serde_json::{json, Value};

const PASSPHRASE: &str = "example-passphrase";

fn main() {
    let clock = Arc::new(ManualClock::new(1_767_225_600_000));
    let opts = ServiceOptions {
        qr_passphrase: Some(PASSPHRASE.into()),
        admin_password: Some("admin-secret".into()),
        snapshot_every: None,
    };
    let svc = Arc::new(Service::in_memory(opts, clock.clone()));
    let api = LocalApi::new(router(svc.clone(), None));
    let call = |path: &str, token: Option<&str>, body: Value| -> Value {
        let r = api.post(path, token, &body);
        assert!(r.status < 300, "{path}: HTTP {} {}", r.status, r.text());
        r.json().unwrap()
    };
    let login = |l: &str, p: &str| call("/api/auth/login", None, json!({"login": l, "password": p}))["token"]
        .as_str()
        .unwrap()
        .to_owned();

    let admin = login("admin", "admin-secret");
    let provider = call("/api/providers/register", None, json!({"name": "Deccan Movers", "login": "deccan", "password": "pw-deccan"}));
    let provider_id = provider["providerId"].as_str().unwrap();
    call(&format!("/api/admin/providers/{provider_id}/approve"), Some(&admin), json!({}));
    let prov = login("deccan", "pw-deccan");
    let vehicle = call("/api/vehicles", Some(&prov), json!({"vehicleType": "van", "costPerKm": 400, "location": {"lat": 18.521, "lon": 73.851}}));
    let vehicle_id = vehicle["vehicleId"].as_str().unwrap().to_owned();
    call("/api/drivers", Some(&prov), json!({"name": "Asha", "login": "asha", "password": "pw-asha"}));
    let drv = login("asha", "pw-asha");
    call("/api/customers/register", None, json!({"name": "Meera", "login": "meera", "password": "pw-meera"}));
    let cust = login("meera", "pw-meera");

    let (from, to) = ((18.52, 73.85), (18.56, 73.90));
    let booked = call(
        "/api/requests",
        Some(&cust),
        json!({"pickup": {"lat": from.0, "lon": from.1}, "dropoff": {"lat": to.0, "lon": to.1}, "vehicleType": "van"}),
    );
    let trip_id = booked["trip"]["tripId"].as_str().unwrap().to_owned();
    let request_id = booked["request"]["requestId"].as_str().unwrap();
    println!("trip {trip_id} allocated to {vehicle_id}");
    call(&format!("/api/driver/requests/{request_id}/accept"), Some(&drv), json!({}));

    let route = Polyline::new(vec![GeoPoint::new(from.0, from.1).unwrap(), GeoPoint::new(to.0, to.1).unwrap()]).unwrap();
    let start = clock.advance(60_000);
    let fixes = simulate_transmitter(&vehicle_id.as_str().into(), &route, TransmitterConfig::new(40.0, 10_000, start)).unwrap();
    for f in &fixes {
        clock.set(f.timestamp);
        call("/api/telemetry", Some(&drv), serde_json::to_value(f).unwrap());
    }
    println!("{} fixes ingested", fixes.len());

    let done = call(&format!("/api/driver/trips/{trip_id}/complete"), Some(&drv), json!({}));
    println!("completed: {} km, cost {}", done["trip"]["actualDrKm"], done["trip"]["finalCost"]);
    let paid = call(&format!("/api/trips/{trip_id}/payment"), Some(&cust), json!({}));
    println!("payment {} of {}", paid["paymentId"], paid["amount"]);
    call("/api/reviews", Some(&cust), json!({"tripId": trip_id, "stars": 5, "text": "great driver, nice van"}));

    let qr = api.get(&format!("/api/trips/{trip_id}/qr"), Some(&cust));
    let symbol = QrMatrix::from_pbm(&qr.text()).unwrap();
    let summary = open_trip_qr(&symbol, PASSPHRASE).unwrap();
    println!("QR v{} decodes to {}", symbol.version(), String::from_utf8_lossy(&summary));
    println!("{} events in the log", svc.seq());
}
