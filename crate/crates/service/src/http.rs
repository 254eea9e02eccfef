//! The HTTP/JSON surface over [`Service`].

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use fleetline_core::dispatch::VehicleStatus;
use fleetline_core::ids::{ProviderId, RequestId, TripId, VehicleId};
use fleetline_core::qr::EcLevel;
use fleetline_core::tracking::TelemetryMsg;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::auth::Principal;
use crate::error::ServiceError;
use crate::service::{
    Credentials, NewNotification, NewRequest, NewReview, NewVehicle, Registration, Service,
    VehicleQuery,
};

pub const QR_VERSION_HEADER: &str = "x-qr-version";
pub const PBM_CONTENT_TYPE: &str = "image/x-portable-bitmap";

type Shared = Arc<Service>;
type ApiResult<T> = Result<T, ServiceError>;

/// JSON body whose rejections become 422 `{code, message}` responses.
pub struct Body<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Body<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        axum::Json::<T>::from_request(req, state)
            .await
            .map(|j| Body(j.0))
            .map_err(|e: JsonRejection| ServiceError::validation(e.body_text()))
    }
}

/// Query string with the same error treatment as [`Body`].
pub struct Params<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for Params<T> {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Params(q.0))
            .map_err(|e: QueryRejection| ServiceError::validation(e.body_text()))
    }
}

fn bearer(parts: &Parts) -> Option<&str> {
    parts
        .headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

/// The caller behind the request's bearer token.
pub struct Auth(pub Principal);

impl FromRequestParts<Shared> for Auth {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, svc: &Shared) -> Result<Self, Self::Rejection> {
        let token = bearer(parts).ok_or(ServiceError::Unauthenticated)?;
        svc.session(token).map(Auth)
    }
}

struct Token(String);

impl FromRequestParts<Shared> for Token {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, _: &Shared) -> Result<Self, Self::Rejection> {
        bearer(parts)
            .map(|t| Token(t.to_owned()))
            .ok_or(ServiceError::Unauthenticated)
    }
}

fn json<T: Serialize>(v: T) -> Response {
    axum::Json(v).into_response()
}

fn created<T: Serialize>(v: T) -> Response {
    (StatusCode::CREATED, axum::Json(v)).into_response()
}

async fn login(State(svc): State<Shared>, Body(c): Body<Credentials>) -> ApiResult<Response> {
    Ok(json(svc.login(&c.login, &c.password)?))
}

async fn logout(State(svc): State<Shared>, Token(t): Token) -> ApiResult<StatusCode> {
    svc.logout(&t)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn register_provider(State(svc): State<Shared>, Body(r): Body<Registration>) -> ApiResult<Response> {
    Ok(created(svc.register_provider(&r)?))
}

async fn register_customer(State(svc): State<Shared>, Body(r): Body<Registration>) -> ApiResult<Response> {
    Ok(created(svc.register_customer(&r)?))
}

async fn approve_provider(
    State(svc): State<Shared>,
    Auth(p): Auth,
    Path(id): Path<ProviderId>,
) -> ApiResult<Response> {
    Ok(json(svc.approve_provider(&p, &id)?))
}

async fn admin_providers(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.list_providers(&p)?))
}

async fn admin_customers(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.list_customers(&p)?))
}

async fn admin_vehicles(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.list_all_vehicles(&p)?))
}

async fn admin_spam(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.spam_report(&p)?))
}

async fn admin_rankings(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.rankings(&p)?))
}

async fn admin_sentiment(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.sentiment(&p)?))
}

async fn provider_me(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.provider_profile(&p)?))
}

async fn add_vehicle(State(svc): State<Shared>, Auth(p): Auth, Body(v): Body<NewVehicle>) -> ApiResult<Response> {
    Ok(created(svc.add_vehicle(&p, &v)?))
}

async fn search_vehicles(
    State(svc): State<Shared>,
    Auth(p): Auth,
    Params(q): Params<VehicleQuery>,
) -> ApiResult<Response> {
    Ok(json(svc.search_vehicles(&p, &q)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusChange {
    status: VehicleStatus,
}

async fn set_vehicle_status(
    State(svc): State<Shared>,
    Auth(p): Auth,
    Path(id): Path<VehicleId>,
    Body(s): Body<StatusChange>,
) -> ApiResult<Response> {
    Ok(json(svc.set_vehicle_status(&p, &id, s.status)?))
}

async fn vehicle_track(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<VehicleId>) -> ApiResult<Response> {
    Ok(json(svc.vehicle_track(&p, &id)?))
}

async fn add_driver(State(svc): State<Shared>, Auth(p): Auth, Body(r): Body<Registration>) -> ApiResult<Response> {
    Ok(created(svc.add_driver(&p, &r)?))
}

async fn provider_requests(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.provider_requests(&p)?))
}

async fn create_request(State(svc): State<Shared>, Auth(p): Auth, Body(r): Body<NewRequest>) -> ApiResult<Response> {
    Ok(created(svc.create_request(&p, &r)?))
}

async fn notify(State(svc): State<Shared>, Auth(p): Auth, Body(n): Body<NewNotification>) -> ApiResult<Response> {
    Ok(created(svc.notify_driver(&p, &n)?))
}

async fn vehicle_schedule(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<VehicleId>) -> ApiResult<Response> {
    Ok(json(svc.vehicle_schedule(&p, &id)?))
}

async fn history(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.history(&p)?))
}

async fn recommendations(
    State(svc): State<Shared>,
    Auth(p): Auth,
    Params(q): Params<VehicleQuery>,
) -> ApiResult<Response> {
    Ok(json(svc.recommendations(&p, &q)?))
}

async fn list_trips(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.list_trips(&p)?))
}

async fn get_trip(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<TripId>) -> ApiResult<Response> {
    Ok(json(svc.get_trip(&p, &id)?))
}

async fn trip_position(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<TripId>) -> ApiResult<Response> {
    Ok(json(svc.trip_position(&p, &id)?))
}

async fn pay(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<TripId>) -> ApiResult<Response> {
    Ok(created(svc.pay(&p, &id)?))
}

async fn cancel_trip(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<TripId>) -> ApiResult<Response> {
    Ok(json(svc.cancel_trip(&p, &id)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QrParams {
    ec: Option<String>,
}

fn parse_ec(s: &str) -> ApiResult<EcLevel> {
    match s {
        "L" | "l" => Ok(EcLevel::L),
        "M" | "m" => Ok(EcLevel::M),
        "Q" | "q" => Ok(EcLevel::Q),
        "H" | "h" => Ok(EcLevel::H),
        _ => Err(ServiceError::validation(format!("unknown error correction level {s}"))),
    }
}

async fn trip_qr(
    State(svc): State<Shared>,
    Auth(p): Auth,
    Path(id): Path<TripId>,
    Params(q): Params<QrParams>,
) -> ApiResult<Response> {
    let ec = q.ec.as_deref().map_or(Ok(EcLevel::M), parse_ec)?;
    let m = svc.trip_qr(&p, &id, ec)?;
    let mut resp = m.to_pbm().into_response();
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(PBM_CONTENT_TYPE));
    headers.insert(QR_VERSION_HEADER, HeaderValue::from(u16::from(m.version())));
    Ok(resp)
}

async fn submit_review(State(svc): State<Shared>, Auth(p): Auth, Body(r): Body<NewReview>) -> ApiResult<Response> {
    Ok(created(svc.submit_review(&p, &r)?))
}

async fn driver_requests(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.driver_requests(&p)?))
}

async fn accept_request(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<RequestId>) -> ApiResult<Response> {
    Ok(json(svc.accept_request(&p, &id)?))
}

async fn complete_trip(State(svc): State<Shared>, Auth(p): Auth, Path(id): Path<TripId>) -> ApiResult<Response> {
    Ok(json(svc.complete_trip(&p, &id)?))
}

async fn driver_schedule(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.driver_schedule(&p)?))
}

async fn driver_notifications(State(svc): State<Shared>, Auth(p): Auth) -> ApiResult<Response> {
    Ok(json(svc.driver_notifications(&p)?))
}

async fn telemetry(State(svc): State<Shared>, Auth(p): Auth, Body(m): Body<TelemetryMsg>) -> ApiResult<Response> {
    Ok(json(svc.ingest_telemetry(&p, &m)?))
}

async fn not_found() -> ServiceError {
    ServiceError::not_found("route", "")
}

/// Every `/api` route.
pub fn api_router(svc: Shared) -> Router {
    Router::new()
        .route("/api/auth/login", post(login))
        .route("/api/auth/logout", post(logout))
        .route("/api/providers/register", post(register_provider))
        .route("/api/customers/register", post(register_customer))
        .route("/api/providers/me", get(provider_me))
        .route("/api/admin/providers", get(admin_providers))
        .route("/api/admin/providers/{id}/approve", post(approve_provider))
        .route("/api/admin/customers", get(admin_customers))
        .route("/api/admin/vehicles", get(admin_vehicles))
        .route("/api/admin/spam", get(admin_spam))
        .route("/api/admin/rankings", get(admin_rankings))
        .route("/api/admin/sentiment", get(admin_sentiment))
        .route("/api/vehicles", post(add_vehicle).get(search_vehicles))
        .route("/api/vehicles/{id}/status", post(set_vehicle_status))
        .route("/api/vehicles/{id}/track", get(vehicle_track))
        .route("/api/drivers", post(add_driver))
        .route("/api/requests", get(provider_requests).post(create_request))
        .route("/api/notifications", post(notify))
        .route("/api/schedule/{id}", get(vehicle_schedule))
        .route("/api/history", get(history))
        .route("/api/recommendations", get(recommendations))
        .route("/api/trips", get(list_trips))
        .route("/api/trips/{id}", get(get_trip))
        .route("/api/trips/{id}/position", get(trip_position))
        .route("/api/trips/{id}/payment", post(pay))
        .route("/api/trips/{id}/cancel", post(cancel_trip))
        .route("/api/trips/{id}/qr", get(trip_qr))
        .route("/api/reviews", post(submit_review))
        .route("/api/driver/requests", get(driver_requests))
        .route("/api/driver/requests/{id}/accept", post(accept_request))
        .route("/api/driver/trips/{id}/complete", post(complete_trip))
        .route("/api/driver/schedule", get(driver_schedule))
        .route("/api/driver/notifications", get(driver_notifications))
        .route("/api/telemetry", post(telemetry))
        .fallback(not_found)
        .with_state(svc)
}

/// The API plus the web console's static bundle under `/console`.
pub fn router(svc: Shared, console_dir: Option<PathBuf>) -> Router {
    let api = api_router(svc);
    match console_dir {
        Some(dir) => api.nest_service("/console", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}
