//! Every endpoint against every kind of caller: forbidden exactly where the
//! permission matrix says so, and unauthenticated without a token.

mod common;

use axum::http::Method;
use common::{code, World};
use fleetline::auth::{permits, Action, Standing};
use serde_json::{json, Value};

struct Endpoint {
    method: Method,
    path: &'static str,
    action: Action,
    body: Option<Value>,
}

fn endpoints() -> Vec<Endpoint> {
    use Action::*;
    let get = |path, action| Endpoint {
        method: Method::GET,
        path,
        action,
        body: None,
    };
    let post = |path, action, body: Value| Endpoint {
        method: Method::POST,
        path,
        action,
        body: Some(body),
    };
    let here = json!({ "lat": 18.5, "lon": 73.8 });
    vec![
        get("/api/providers/me", ReadProviderProfile),
        post("/api/admin/providers/P999999/approve", ApproveProvider, json!({})),
        get("/api/admin/providers", ListProviders),
        get("/api/admin/customers", ListCustomers),
        get("/api/admin/vehicles", ListAllVehicles),
        get("/api/admin/spam", SpamReport),
        get("/api/admin/rankings", Rankings),
        get("/api/admin/sentiment", SentimentReport),
        post(
            "/api/vehicles",
            AddVehicle,
            json!({ "vehicleType": "van", "costPerKm": 100, "location": here }),
        ),
        post("/api/vehicles/V999999/status", SetVehicleStatus, json!({ "status": "available" })),
        get("/api/vehicles/V999999/track", ViewTrack),
        post(
            "/api/drivers",
            AddDriver,
            json!({ "name": "m", "login": "matrix-driver", "password": "pw" }),
        ),
        get("/api/requests", ListProviderRequests),
        post("/api/notifications", NotifyDriver, json!({ "driverId": "D999999", "message": "x" })),
        get("/api/schedule/V999999", ViewVehicleSchedule),
        get("/api/history", ViewHistory),
        get("/api/vehicles?type=van&lat=18.5&lon=73.8", SearchVehicles),
        post(
            "/api/requests",
            CreateRequest,
            json!({ "pickup": here, "dropoff": { "lat": 18.6, "lon": 73.9 }, "vehicleType": "hovercraft" }),
        ),
        get("/api/recommendations?lat=18.5&lon=73.8", Recommend),
        get("/api/trips", ListTrips),
        get("/api/trips/T999999", ViewTrip),
        get("/api/trips/T999999/position", ViewTripPosition),
        post("/api/trips/T999999/payment", PayTrip, json!({})),
        post("/api/trips/T999999/cancel", CancelTrip, json!({})),
        get("/api/trips/T999999/qr", FetchTripQr),
        post("/api/reviews", SubmitReview, json!({ "tripId": "T999999", "text": "ok", "stars": 3 })),
        get("/api/driver/requests", ViewDriverRequests),
        post("/api/driver/requests/Q999999/accept", AcceptRequest, json!({})),
        post("/api/driver/trips/T999999/complete", CompleteTrip, json!({})),
        get("/api/driver/schedule", ViewDriverSchedule),
        get("/api/driver/notifications", ReadNotifications),
        post(
            "/api/telemetry",
            PostTelemetry,
            json!({ "vehicleId": "V999999", "lat": 18.5, "lon": 73.8, "ts": 1, "seq": 1 }),
        ),
    ]
}

#[test]
fn endpoint_table_covers_every_action() {
    let table = endpoints();
    for a in Action::ALL {
        if a == Action::Logout {
            continue;
        }
        assert!(table.iter().any(|e| e.action == a), "no endpoint for {a:?}");
    }
}

#[test]
fn every_role_endpoint_pair_is_decided_by_the_matrix() {
    let w = World::new();
    let (_, pending) = w.pending_provider("pending");
    let (_, approved) = w.provider("approved");
    let (_, driver) = w.driver(&approved, "driver");
    let (_, customer) = w.customer("customer");
    let callers = [
        (Standing::Admin, w.admin.clone()),
        (Standing::PendingProvider, pending),
        (Standing::ApprovedProvider, approved),
        (Standing::Customer, customer),
        (Standing::Driver, driver),
    ];
    let mut checked = 0;
    for e in endpoints() {
        for (standing, token) in &callers {
            let r = w.api.call(e.method.clone(), e.path, Some(token), e.body.as_ref());
            if permits(*standing, e.action) {
                assert!(
                    r.status != 401 && r.status != 403,
                    "{standing:?} {} {} should pass the gate, got {} {}",
                    e.method,
                    e.path,
                    r.status,
                    r.text()
                );
            } else {
                assert_eq!(r.status, 403, "{standing:?} {} {}: {}", e.method, e.path, r.text());
                assert_eq!(code(&r), "forbidden");
            }
            checked += 1;
        }
        let anon = w.api.call(e.method.clone(), e.path, None, e.body.as_ref());
        assert_eq!(anon.status, 401, "anonymous {} {}", e.method, e.path);
    }
    assert_eq!(checked, endpoints().len() * Standing::ALL.len());
}

#[test]
fn denied_calls_leave_the_log_untouched() {
    let w = World::new();
    let (_, customer) = w.customer("customer");
    let before = w.svc.seq();
    for e in endpoints() {
        if !permits(Standing::Customer, e.action) {
            w.api.call(e.method.clone(), e.path, Some(&customer), e.body.as_ref());
        }
    }
    assert_eq!(w.svc.seq(), before);
}

#[test]
fn logout_is_open_to_everyone() {
    let w = World::new();
    let (_, pending) = w.pending_provider("pending");
    for token in [w.admin.clone(), pending] {
        assert_eq!(w.post("/api/auth/logout", &token, json!({})).status, 204);
        assert_eq!(w.get("/api/trips", &token).status, 401);
    }
}
