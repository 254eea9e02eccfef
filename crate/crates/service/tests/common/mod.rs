#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use fleetline::clock::ManualClock;
use fleetline::http::router;
use fleetline::local::{LocalApi, LocalResponse};
use fleetline::{Service, ServiceOptions};
use fleetline_core::geo::{GeoPoint, Polyline};
use fleetline_core::tracking::{simulate_transmitter, TransmitterConfig};
use serde_json::{json, Value};

pub const ADMIN_PASSWORD: &str = "admin-secret";
pub const PASSPHRASE: &str = "test-passphrase";
pub const T0: u64 = 1_767_225_600_000;

pub fn options() -> ServiceOptions {
    ServiceOptions {
        qr_passphrase: Some(PASSPHRASE.into()),
        admin_password: Some(ADMIN_PASSWORD.into()),
        snapshot_every: None,
    }
}

pub struct World {
    pub svc: Arc<Service>,
    pub clock: Arc<ManualClock>,
    pub api: LocalApi,
    pub admin: String,
}

pub struct Trip {
    pub trip_id: String,
    pub request_id: String,
    pub customer: String,
    pub driver: String,
    pub provider: String,
    pub vehicle_id: String,
}

impl World {
    pub fn new() -> Self {
        let clock = Arc::new(ManualClock::new(T0));
        Self::with(Service::in_memory(options(), clock.clone()), clock)
    }

    pub fn on_disk(dir: &Path, opts: ServiceOptions) -> Self {
        let clock = Arc::new(ManualClock::new(T0));
        Self::with(Service::open(dir, opts, clock.clone()).expect("open"), clock)
    }

    pub fn with(svc: Service, clock: Arc<ManualClock>) -> Self {
        let svc = Arc::new(svc);
        let api = LocalApi::new(router(svc.clone(), None));
        let mut w = Self {
            svc,
            clock,
            api,
            admin: String::new(),
        };
        w.admin = w.login("admin", ADMIN_PASSWORD);
        w
    }

    pub fn get(&self, path: &str, token: &str) -> LocalResponse {
        self.api.get(path, Some(token))
    }

    pub fn post(&self, path: &str, token: &str, body: Value) -> LocalResponse {
        self.api.post(path, Some(token), &body)
    }

    pub fn ok(&self, resp: LocalResponse) -> Value {
        assert!(
            resp.status == 200 || resp.status == 201,
            "HTTP {}: {}",
            resp.status,
            resp.text()
        );
        resp.json().unwrap()
    }

    pub fn login(&self, login: &str, password: &str) -> String {
        let r = self.api.post("/api/auth/login", None, &json!({ "login": login, "password": password }));
        assert_eq!(r.status, 200, "{}", r.text());
        r.json::<Value>().unwrap()["token"].as_str().unwrap().to_owned()
    }

    /// Registers a provider; returns (provider id, token).
    pub fn pending_provider(&self, login: &str) -> (String, String) {
        let p = self.ok(self.api.post(
            "/api/providers/register",
            None,
            &json!({ "name": format!("{login} ltd"), "login": login, "password": "pw-provider" }),
        ));
        (p["providerId"].as_str().unwrap().to_owned(), self.login(login, "pw-provider"))
    }

    pub fn provider(&self, login: &str) -> (String, String) {
        let (id, token) = self.pending_provider(login);
        self.ok(self.post(&format!("/api/admin/providers/{id}/approve"), &self.admin, json!({})));
        (id, token)
    }

    pub fn vehicle(&self, provider: &str, kind: &str, rate: u64, at: (f64, f64)) -> String {
        let v = self.ok(self.post(
            "/api/vehicles",
            provider,
            json!({ "vehicleType": kind, "costPerKm": rate, "location": { "lat": at.0, "lon": at.1 } }),
        ));
        v["vehicleId"].as_str().unwrap().to_owned()
    }

    pub fn driver(&self, provider: &str, login: &str) -> (String, String) {
        let d = self.ok(self.post(
            "/api/drivers",
            provider,
            json!({ "name": login, "login": login, "password": "pw-driver" }),
        ));
        (d["driverId"].as_str().unwrap().to_owned(), self.login(login, "pw-driver"))
    }

    pub fn customer(&self, login: &str) -> (String, String) {
        let c = self.ok(self.api.post(
            "/api/customers/register",
            None,
            &json!({ "name": login, "login": login, "password": "pw-customer" }),
        ));
        (c["customerId"].as_str().unwrap().to_owned(), self.login(login, "pw-customer"))
    }

    pub fn request(&self, customer: &str, from: (f64, f64), to: (f64, f64), kind: &str) -> LocalResponse {
        self.post(
            "/api/requests",
            customer,
            json!({
                "pickup": { "lat": from.0, "lon": from.1 },
                "dropoff": { "lat": to.0, "lon": to.1 },
                "vehicleType": kind,
            }),
        )
    }

    /// Drives fixes along the straight route of a started trip.
    pub fn drive(&self, token: &str, vehicle_id: &str, from: (f64, f64), to: (f64, f64)) -> usize {
        let route = Polyline::new(vec![
            GeoPoint::new(from.0, from.1).unwrap(),
            GeoPoint::new(to.0, to.1).unwrap(),
        ])
        .unwrap();
        let start = self.clock.advance(1_000);
        let fixes = simulate_transmitter(&vehicle_id.into(), &route, TransmitterConfig::new(40.0, 10_000, start)).unwrap();
        for f in &fixes {
            self.clock.set(f.timestamp);
            let r = self.ok(self.api.post("/api/telemetry", Some(token), f));
            assert_eq!(r["outcome"], "accepted");
        }
        fixes.len()
    }

    /// A provider with one vehicle and driver and a customer, with one trip
    /// allocated, driven and completed.
    pub fn completed_trip(&self, tag: &str, rate: u64) -> Trip {
        let (provider_id, prov) = self.provider(&format!("{tag}-prov"));
        let from = (18.52, 73.85);
        let to = (18.56, 73.90);
        let vehicle_id = self.vehicle(&prov, "van", rate, (18.521, 73.851));
        let (_, drv) = self.driver(&prov, &format!("{tag}-drv"));
        let (_, cust) = self.customer(&format!("{tag}-cust"));
        let out = self.ok(self.request(&cust, from, to, "van"));
        let trip_id = out["trip"]["tripId"].as_str().expect("allocated").to_owned();
        let request_id = out["request"]["requestId"].as_str().unwrap().to_owned();
        self.clock.advance(60_000);
        self.ok(self.post(&format!("/api/driver/requests/{request_id}/accept"), &drv, json!({})));
        self.drive(&drv, &vehicle_id, from, to);
        self.clock.advance(1_000);
        self.ok(self.post(&format!("/api/driver/trips/{trip_id}/complete"), &drv, json!({})));
        let _ = provider_id;
        Trip {
            trip_id,
            request_id,
            customer: cust,
            driver: drv,
            provider: prov,
            vehicle_id,
        }
    }
}

pub fn code(resp: &LocalResponse) -> String {
    resp.error().map(|e| e.code).unwrap_or_default()
}
