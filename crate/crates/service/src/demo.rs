//! The scripted end-to-end run: a provider, a vehicle and a driver, one
//! customer trip driven by simulated telemetry, payment, review and the
//! sealed QR summary read back.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fleetline_core::dispatch::{fuel_usage, trip_cost, Km, RatePerKm};
use fleetline_core::geo::{GeoPoint, Polyline, EARTH_RADIUS_KM};
use fleetline_core::qr::QrMatrix;
use fleetline_core::tracking::{simulate_transmitter, TransmitterConfig};
use fleetline_core::trip_qr::{open_trip_qr, TripQrError};
use fleetline_core::envelope::EnvelopeError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use thiserror::Error;

use crate::clock::ManualClock;
use crate::http::{router, QR_VERSION_HEADER};
use crate::local::{LocalApi, LocalResponse};
use crate::model::TripRecord;
use crate::service::{replay_dir, trip_summary, Service, ServiceOptions};

/// The passphrase the demo service seals QR codes with.
pub const DEMO_PASSPHRASE: &str = "fleetline-demo-passphrase";
pub const DEMO_ADMIN_PASSWORD: &str = "demo-admin-password";
/// 2026-01-01T00:00:00Z.
pub const DEMO_START_MS: u64 = 1_767_225_600_000;
pub const DEMO_TRIP_KM: f64 = 12.5;
/// 4.00 per km in minor units.
pub const DEMO_RATE_MINOR: u64 = 400;
pub const DEMO_SPEED_KMH: f64 = 50.0;
pub const DEMO_INTERVAL_MS: u64 = 30_000;

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub data_dir: PathBuf,
    pub seed: u64,
    /// What the reading side uses to open the QR envelope.
    pub decode_passphrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemoError {
    #[error("step {step}: data directory {0} is not empty (DataDirNotEmpty)", .dir.display())]
    DataDirNotEmpty { step: &'static str, dir: PathBuf },
    #[error("step {step}: {message}")]
    Failed { step: &'static str, message: String },
}

impl DemoError {
    pub fn step(&self) -> &'static str {
        match self {
            DemoError::DataDirNotEmpty { step, .. } | DemoError::Failed { step, .. } => step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub trip_id: String,
    pub final_cost_minor: f64,
    pub summary: Value,
    pub replay_identical: bool,
}

fn fail(step: &'static str, message: impl ToString) -> DemoError {
    DemoError::Failed {
        step,
        message: message.to_string(),
    }
}

fn expect<T: DeserializeOwned>(step: &'static str, resp: LocalResponse, status: u16) -> Result<T, DemoError> {
    if resp.status != status {
        let detail = resp
            .error()
            .map_or_else(|| resp.text(), |e| format!("{}: {}", e.code, e.message));
        return Err(fail(step, format!("HTTP {} ({detail})", resp.status)));
    }
    resp.json().map_err(|e| fail(step, e))
}

fn field(v: &Value, key: &str) -> String {
    v.get(key).and_then(Value::as_str).unwrap_or_default().to_owned()
}

fn is_fresh(dir: &Path) -> bool {
    match std::fs::read_dir(dir) {
        Ok(mut entries) => entries.next().is_none(),
        Err(e) => e.kind() == std::io::ErrorKind::NotFound,
    }
}

/// Runs the demo, writing a transcript to `out`.
pub fn run_demo(opts: &DemoOptions, out: &mut dyn Write) -> Result<DemoReport, DemoError> {
    let mut say = |step: &str, msg: String| {
        let _ = writeln!(out, "[{step}] {msg}");
    };

    if !is_fresh(&opts.data_dir) {
        return Err(DemoError::DataDirNotEmpty {
            step: "open",
            dir: opts.data_dir.clone(),
        });
    }
    let clock = Arc::new(ManualClock::new(DEMO_START_MS));
    let svc = Service::open(
        &opts.data_dir,
        ServiceOptions {
            qr_passphrase: Some(DEMO_PASSPHRASE.into()),
            admin_password: Some(DEMO_ADMIN_PASSWORD.into()),
            snapshot_every: None,
        },
        clock.clone(),
    )
    .map_err(|e| fail("open", e))?;
    let svc = Arc::new(svc);
    let api = LocalApi::new(router(svc.clone(), None));
    say("open", format!("fresh data dir, seed {}", opts.seed));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pickup = GeoPoint::new(rng.random_range(-50.0..50.0), rng.random_range(-170.0..170.0))
        .map_err(|e| fail("open", e))?;
    // due north, so the planned and driven distances are exactly the arc
    let dlat = (DEMO_TRIP_KM / EARTH_RADIUS_KM).to_degrees();
    let dropoff = GeoPoint::new(pickup.lat() + dlat, pickup.lon()).map_err(|e| fail("open", e))?;
    let home = GeoPoint::new(pickup.lat() - 0.01, pickup.lon() + 0.01).map_err(|e| fail("open", e))?;

    let login = |step: &'static str, login: &str, password: &str| -> Result<String, DemoError> {
        let s: Value = expect(
            step,
            api.post("/api/auth/login", None, &json!({ "login": login, "password": password })),
            200,
        )?;
        Ok(field(&s, "token"))
    };

    let provider: Value = expect(
        "register-provider",
        api.post(
            "/api/providers/register",
            None,
            &json!({ "name": "Demo Haulage", "login": "demo-provider", "password": "provider-pass" }),
        ),
        201,
    )?;
    let provider_id = field(&provider, "providerId");
    say("register-provider", format!("{provider_id} pending approval"));

    let admin = login("approve-provider", "admin", DEMO_ADMIN_PASSWORD)?;
    let _: Value = expect(
        "approve-provider",
        api.post::<Value>(&format!("/api/admin/providers/{provider_id}/approve"), Some(&admin), &json!({})),
        200,
    )?;
    say("approve-provider", format!("{provider_id} approved"));

    let prov = login("add-vehicle", "demo-provider", "provider-pass")?;
    let vehicle: Value = expect(
        "add-vehicle",
        api.post(
            "/api/vehicles",
            Some(&prov),
            &json!({
                "vehicleType": "van",
                "costPerKm": DEMO_RATE_MINOR,
                "location": { "lat": home.lat(), "lon": home.lon() },
            }),
        ),
        201,
    )?;
    let vehicle_id = field(&vehicle, "vehicleId");
    say("add-vehicle", format!("{vehicle_id} van at {DEMO_RATE_MINOR} minor/km"));

    let driver: Value = expect(
        "add-driver",
        api.post(
            "/api/drivers",
            Some(&prov),
            &json!({ "name": "Demo Driver", "login": "demo-driver", "password": "driver-pass" }),
        ),
        201,
    )?;
    say("add-driver", field(&driver, "driverId"));

    let _: Value = expect(
        "register-customer",
        api.post(
            "/api/customers/register",
            None,
            &json!({ "name": "Demo Customer", "login": "demo-customer", "password": "customer-pass" }),
        ),
        201,
    )?;
    let cust = login("register-customer", "demo-customer", "customer-pass")?;
    say("register-customer", "demo-customer logged in".into());

    let recs: Vec<Value> = expect(
        "recommend",
        api.get(
            &format!("/api/recommendations?lat={}&lon={}&type=van", pickup.lat(), pickup.lon()),
            Some(&cust),
        ),
        200,
    )?;
    say(
        "recommend",
        format!("{} candidate(s), top {}", recs.len(), recs.first().map(|r| field(r, "vehicleId")).unwrap_or_default()),
    );

    clock.advance(60_000);
    let outcome: Value = expect(
        "request",
        api.post(
            "/api/requests",
            Some(&cust),
            &json!({
                "pickup": { "lat": pickup.lat(), "lon": pickup.lon() },
                "dropoff": { "lat": dropoff.lat(), "lon": dropoff.lon() },
                "vehicleType": "van",
            }),
        ),
        201,
    )?;
    let trip = outcome.get("trip").filter(|t| !t.is_null()).ok_or_else(|| {
        fail("allocate", format!("request not allocated: {}", outcome["allocation"]))
    })?;
    let trip_id = field(trip, "tripId");
    let request_id = field(&outcome["request"], "requestId");
    say(
        "allocate",
        format!(
            "{request_id} -> {trip_id} with {} / {}, planned {} km, quoted {}",
            field(trip, "vehicleId"),
            field(trip, "driverId"),
            field(trip, "plannedDrKm"),
            field(trip, "quotedCost"),
        ),
    );

    let drv = login("accept", "demo-driver", "driver-pass")?;
    let inbox: Vec<Value> = expect("accept", api.get("/api/driver/requests", Some(&drv)), 200)?;
    if inbox.len() != 1 {
        return Err(fail("accept", format!("driver sees {} requests", inbox.len())));
    }
    clock.advance(60_000);
    let started: TripRecord = expect(
        "accept",
        api.post::<Value>(&format!("/api/driver/requests/{request_id}/accept"), Some(&drv), &json!({})),
        200,
    )?;
    let start_ms = started.started_at.ok_or_else(|| fail("accept", "trip has no start time"))?;
    say("accept", format!("{trip_id} in transit"));

    let route = Polyline::new(vec![pickup, dropoff]).map_err(|e| fail("telemetry", e))?;
    let fixes = simulate_transmitter(
        &vehicle_id.as_str().into(),
        &route,
        TransmitterConfig::new(DEMO_SPEED_KMH, DEMO_INTERVAL_MS, start_ms),
    )
    .map_err(|e| fail("telemetry", e))?;
    for f in &fixes {
        clock.set(f.timestamp);
        let r: Value = expect("telemetry", api.post("/api/telemetry", Some(&drv), f), 200)?;
        if field(&r, "outcome") != "accepted" {
            return Err(fail("telemetry", format!("fix {} was {}", f.seq, r["outcome"])));
        }
    }
    let pos: Value = expect("telemetry", api.get(&format!("/api/trips/{trip_id}/position"), Some(&cust)), 200)?;
    say(
        "telemetry",
        format!("{} fixes, last at ({:.5}, {:.5})", fixes.len(), pos["position"]["point"]["lat"], pos["position"]["point"]["lon"]),
    );

    clock.advance(1_000);
    let done: TripRecord = expect(
        "complete",
        api.post::<Value>(&format!("/api/driver/trips/{trip_id}/complete"), Some(&drv), &json!({})),
        200,
    )?;
    let actual = done.trip.actual_dr_km.ok_or_else(|| fail("complete", "no actual distance"))?;
    let final_cost = done.trip.final_cost.ok_or_else(|| fail("complete", "no final cost"))?;
    let fuel = done.trip.fuel_units.ok_or_else(|| fail("complete", "no fuel figure"))?;
    let rate = RatePerKm::new(DEMO_RATE_MINOR).map_err(|e| fail("complete", e))?;
    let want = trip_cost(Km::from_km(DEMO_TRIP_KM).map_err(|e| fail("complete", e))?, rate)
        .map_err(|e| fail("complete", e))?;
    say("complete", format!("actual_dr_km = {actual}"));
    say("complete", format!("final_cost = {:.2}", final_cost.as_major()));
    say("complete", format!("fuel_units = {:.3}", fuel.as_major_km()));
    if final_cost != want || fuel != fuel_usage(want, actual) {
        return Err(fail("complete", format!("expected final cost {want}, got {final_cost}")));
    }

    let payment: Value = expect(
        "pay",
        api.post::<Value>(&format!("/api/trips/{trip_id}/payment"), Some(&cust), &json!({})),
        201,
    )?;
    say("pay", format!("{} amount {}", field(&payment, "paymentId"), field(&payment, "amount")));

    let review: Value = expect(
        "review",
        api.post(
            "/api/reviews",
            Some(&cust),
            &json!({ "tripId": trip_id, "text": "great driver and a good clean van", "stars": 5 }),
        ),
        201,
    )?;
    say("review", field(&review, "reviewId"));

    let qr = api.get(&format!("/api/trips/{trip_id}/qr"), Some(&cust));
    if qr.status != 200 {
        return Err(fail("qr-fetch", format!("HTTP {}", qr.status)));
    }
    let version = qr
        .headers
        .get(QR_VERSION_HEADER)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("?")
        .to_owned();
    let matrix = QrMatrix::from_pbm(&qr.text()).map_err(|e| fail("qr-fetch", e))?;
    say("qr-fetch", format!("version {version}, {}x{} modules", matrix.side(), matrix.side()));

    let opened = open_trip_qr(&matrix, &opts.decode_passphrase).map_err(|e| match e {
        TripQrError::Envelope(EnvelopeError::AuthFailure) => fail("qr-open", "AuthFailure"),
        other => fail("qr-open", other),
    })?;
    let recovered: Value = serde_json::from_slice(&opened).map_err(|e| fail("qr-open", e))?;
    say("qr-open", format!("{} bytes recovered", opened.len()));

    let served: TripRecord = expect("summary-check", api.get(&format!("/api/trips/{trip_id}"), Some(&cust)), 200)?;
    let expected = trip_summary(&served.trip);
    if recovered != expected {
        return Err(fail("summary-check", format!("recovered {recovered} but served {expected}")));
    }
    say("summary-check", "recovered summary equals served trip".into());

    let replayed = replay_dir(&opts.data_dir).map_err(|e| fail("replay-check", e))?;
    let identical = replayed.canonical_bytes() == svc.canonical_state();
    if !identical {
        return Err(fail("replay-check", "replayed state differs from live state"));
    }
    say("replay-check", format!("{} events replay to identical state", replayed.seq));

    Ok(DemoReport {
        trip_id,
        final_cost_minor: final_cost.as_minor(),
        summary: recovered,
        replay_identical: identical,
    })
}
