//! Scenario files: line-delimited `{"kind":..,"payload":..}` commands that
//! populate a service. A file is checked completely before anything is
//! written, and seeding the same scenario name twice is a no-op.

use std::collections::{BTreeMap, BTreeSet};

use fleetline_core::dispatch::{self, DriverStatus, RatePerKm, Vehicle, VehicleStatus};
use fleetline_core::geo::{GeoPoint, Polyline};
use fleetline_core::ids::{CustomerId, DriverId, ProviderId, VehicleId};
use fleetline_core::recommender::{MAX_RATING, MIN_RATING};
use fleetline_core::reviews::{validate_review, Review};
use fleetline_core::tracking::{simulate_transmitter, TransmitterConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ServiceError;
use crate::events::Event;
use crate::model::{Account, ApprovalStatus, Customer, PasswordHash, Provider, Role};
use crate::service::Service;

pub const FIGURE4: &str = include_str!("../scenarios/figure4.jsonl");
pub const DOUBLED: &str = include_str!("../scenarios/doubled.jsonl");

/// A scenario shipped with the binary, by name.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "figure4" => Some(FIGURE4),
        "doubled" => Some(DOUBLED),
        _ => None,
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "payload",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase",
    deny_unknown_fields
)]
pub enum Command {
    Scenario {
        name: String,
    },
    Provider {
        #[serde(rename = "ref")]
        reference: String,
        name: String,
        login: String,
        password: String,
        #[serde(default = "default_true")]
        approved: bool,
    },
    Customer {
        #[serde(rename = "ref")]
        reference: String,
        name: String,
        login: String,
        password: String,
    },
    Driver {
        #[serde(rename = "ref")]
        reference: String,
        provider: String,
        name: String,
        login: String,
        password: String,
    },
    Vehicle {
        #[serde(rename = "ref")]
        reference: String,
        provider: String,
        #[serde(rename = "type")]
        vehicle_type: String,
        cost_per_km: u64,
        lat: f64,
        lon: f64,
    },
    Rating {
        customer: String,
        vehicle: String,
        stars: f64,
    },
    Review {
        customer: String,
        provider: String,
        text: String,
        stars: u8,
        at: u64,
    },
    /// Telemetry a vehicle's transmitter would send driving `points`.
    Path {
        vehicle: String,
        points: Vec<[f64; 2]>,
        speed_kmh: f64,
        interval_ms: u64,
        start_ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}, field {field}: {message}")]
    Validation {
        line: usize,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Service(#[from] ServiceError),
}

fn invalid(line: usize, field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        line,
        field: field.into(),
        message: message.into(),
    }
}

/// A parsed, not yet validated, scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    /// Commands with their 1-based line numbers.
    pub commands: Vec<(usize, Command)>,
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let mut name = None;
    let mut commands = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let cmd: Command = serde_json::from_str(raw).map_err(|e| invalid(line, "kind", e.to_string()))?;
        match cmd {
            Command::Scenario { name: n } => {
                if name.is_some() || !commands.is_empty() {
                    return Err(invalid(line, "kind", "the scenario line must come first, once"));
                }
                if n.trim().is_empty() {
                    return Err(invalid(line, "name", "must not be empty"));
                }
                name = Some(n);
            }
            other => {
                if name.is_none() {
                    return Err(invalid(line, "kind", "expected a scenario line first"));
                }
                commands.push((line, other));
            }
        }
    }
    Ok(Scenario { name, commands })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedSummary {
    pub name: Option<String>,
    pub already_seeded: bool,
    pub providers: usize,
    pub customers: usize,
    pub drivers: usize,
    pub vehicles: usize,
    pub ratings: usize,
    pub reviews: usize,
    pub fixes: usize,
}

impl SeedSummary {
    pub fn entities(&self) -> usize {
        self.providers + self.customers + self.drivers + self.vehicles + self.ratings + self.reviews + self.fixes
    }
}

fn point(line: usize, lat: f64, lon: f64) -> Result<GeoPoint, ScenarioError> {
    GeoPoint::new(lat, lon).map_err(|e| invalid(line, "lat", e.to_string()))
}

/// Everything a scenario needs from the target state to be checked.
struct Refs<'a> {
    providers: BTreeSet<&'a str>,
    customers: BTreeSet<&'a str>,
    vehicles: BTreeSet<&'a str>,
    logins: BTreeSet<&'a str>,
}

fn check_ref(line: usize, field: &str, set: &BTreeSet<&str>, r: &str) -> Result<(), ScenarioError> {
    if set.contains(r) {
        Ok(())
    } else {
        Err(invalid(line, field, format!("unknown reference {r}")))
    }
}

fn define<'a>(line: usize, set: &mut BTreeSet<&'a str>, r: &'a str) -> Result<(), ScenarioError> {
    if r.is_empty() {
        return Err(invalid(line, "ref", "must not be empty"));
    }
    if !set.insert(r) {
        return Err(invalid(line, "ref", format!("duplicate reference {r}")));
    }
    Ok(())
}

fn check_account(
    line: usize,
    refs: &mut Refs<'_>,
    taken: &BTreeMap<String, fleetline_core::ids::AccountId>,
    login: &str,
    name: &str,
    password: &str,
) -> Result<(), ScenarioError> {
    if name.trim().is_empty() {
        return Err(invalid(line, "name", "must not be empty"));
    }
    if password.is_empty() {
        return Err(invalid(line, "password", "must not be empty"));
    }
    let ok = (3..=64).contains(&login.len())
        && login
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b"._-".contains(&b));
    if !ok {
        return Err(invalid(line, "login", "must be 3-64 characters of a-z, 0-9, '.', '_' or '-'"));
    }
    if taken.contains_key(login) || refs.logins.contains(login) {
        return Err(invalid(line, "login", format!("login {login} is taken")));
    }
    Ok(())
}

/// Checks every command against the file's own references and the logins
/// already in `taken`.
pub fn validate(
    s: &Scenario,
    taken: &BTreeMap<String, fleetline_core::ids::AccountId>,
) -> Result<(), ScenarioError> {
    let mut refs = Refs {
        providers: BTreeSet::new(),
        customers: BTreeSet::new(),
        vehicles: BTreeSet::new(),
        logins: BTreeSet::new(),
    };
    for (line, cmd) in &s.commands {
        let line = *line;
        match cmd {
            Command::Scenario { .. } => unreachable!("parse strips the scenario line"),
            Command::Provider { reference, name, login, password, .. } => {
                check_account(line, &mut refs, taken, login, name, password)?;
                define(line, &mut refs.providers, reference)?;
                refs.logins.insert(login);
            }
            Command::Customer { reference, name, login, password } => {
                check_account(line, &mut refs, taken, login, name, password)?;
                define(line, &mut refs.customers, reference)?;
                refs.logins.insert(login);
            }
            Command::Driver { reference, provider, name, login, password } => {
                check_ref(line, "provider", &refs.providers, provider)?;
                check_account(line, &mut refs, taken, login, name, password)?;
                if reference.is_empty() {
                    return Err(invalid(line, "ref", "must not be empty"));
                }
                refs.logins.insert(login);
            }
            Command::Vehicle { reference, provider, vehicle_type, cost_per_km, lat, lon } => {
                check_ref(line, "provider", &refs.providers, provider)?;
                if vehicle_type.trim().is_empty() {
                    return Err(invalid(line, "type", "must not be empty"));
                }
                RatePerKm::new(*cost_per_km).map_err(|e| invalid(line, "costPerKm", e.to_string()))?;
                point(line, *lat, *lon)?;
                define(line, &mut refs.vehicles, reference)?;
            }
            Command::Rating { customer, vehicle, stars } => {
                check_ref(line, "customer", &refs.customers, customer)?;
                check_ref(line, "vehicle", &refs.vehicles, vehicle)?;
                if !(MIN_RATING..=MAX_RATING).contains(stars) {
                    return Err(invalid(line, "stars", format!("{stars} outside 1..=5")));
                }
            }
            Command::Review { customer, provider, text, stars, .. } => {
                check_ref(line, "customer", &refs.customers, customer)?;
                check_ref(line, "provider", &refs.providers, provider)?;
                validate_review(text, *stars).map_err(|e| {
                    let field = if text.chars().count() > fleetline_core::reviews::MAX_REVIEW_CHARS { "text" } else { "stars" };
                    invalid(line, field, e.to_string())
                })?;
            }
            Command::Path { vehicle, points, speed_kmh, interval_ms, .. } => {
                check_ref(line, "vehicle", &refs.vehicles, vehicle)?;
                let pts = points
                    .iter()
                    .map(|[lat, lon]| point(line, *lat, *lon))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| invalid(line, "points", "invalid coordinate"))?;
                Polyline::new(pts).map_err(|e| invalid(line, "points", e.to_string()))?;
                if !(speed_kmh.is_finite() && *speed_kmh > 0.0) {
                    return Err(invalid(line, "speedKmh", "must be positive"));
                }
                if *interval_ms == 0 {
                    return Err(invalid(line, "intervalMs", "must be positive"));
                }
            }
        }
    }
    Ok(())
}

/// Seeds `text` into `svc`: parse, validate against the live state, then
/// write. Returns what was created.
pub fn seed(svc: &Service, text: &str) -> Result<SeedSummary, ScenarioError> {
    let scenario = parse(text)?;
    let Some(name) = scenario.name.clone() else {
        return Ok(SeedSummary::default());
    };
    svc.write(|svc, core| {
        if core.state.scenarios.contains(&name) {
            return Ok::<_, ScenarioError>(SeedSummary {
                name: Some(name.clone()),
                already_seeded: true,
                ..SeedSummary::default()
            });
        }
        validate(&scenario, &core.state.logins)?;

        let mut summary = SeedSummary {
            name: Some(name.clone()),
            ..SeedSummary::default()
        };
        let mut providers: BTreeMap<&str, ProviderId> = BTreeMap::new();
        let mut customers: BTreeMap<&str, CustomerId> = BTreeMap::new();
        let mut vehicles: BTreeMap<&str, VehicleId> = BTreeMap::new();
        for (_, cmd) in &scenario.commands {
            match cmd {
                Command::Scenario { .. } => {}
                Command::Provider { reference, name, login, password, approved } => {
                    let account_id = core.state.next_account_id();
                    let provider = Provider {
                        provider_id: core.state.next_provider_id(),
                        account_id: account_id.clone(),
                        name: name.clone(),
                        status: ApprovalStatus::Pending,
                    };
                    let id = provider.provider_id.clone();
                    let account = Account {
                        account_id,
                        login: login.clone(),
                        role: Role::Provider,
                        password: PasswordHash::new(password),
                        subject: id.to_string(),
                    };
                    svc.commit(core, Event::ProviderRegistered { account, provider })?;
                    if *approved {
                        svc.commit(core, Event::ProviderApproved { provider_id: id.clone() })?;
                    }
                    providers.insert(reference, id);
                    summary.providers += 1;
                }
                Command::Customer { reference, name, login, password } => {
                    let account_id = core.state.next_account_id();
                    let customer = Customer {
                        customer_id: core.state.next_customer_id(),
                        account_id: account_id.clone(),
                        name: name.clone(),
                    };
                    let id = customer.customer_id.clone();
                    let account = Account {
                        account_id,
                        login: login.clone(),
                        role: Role::Customer,
                        password: PasswordHash::new(password),
                        subject: id.to_string(),
                    };
                    svc.commit(core, Event::CustomerRegistered { account, customer })?;
                    customers.insert(reference, id);
                    summary.customers += 1;
                }
                Command::Driver { provider, name, login, password, .. } => {
                    let driver = dispatch::Driver {
                        driver_id: core.state.next_driver_id(),
                        provider_id: providers[provider.as_str()].clone(),
                        name: name.clone(),
                        status: DriverStatus::Free,
                    };
                    let account = Account {
                        account_id: core.state.next_account_id(),
                        login: login.clone(),
                        role: Role::Driver,
                        password: PasswordHash::new(password),
                        subject: DriverId::to_string(&driver.driver_id),
                    };
                    svc.commit(core, Event::DriverAdded { account, driver })?;
                    summary.drivers += 1;
                }
                Command::Vehicle { reference, provider, vehicle_type, cost_per_km, lat, lon } => {
                    let vehicle = Vehicle {
                        vehicle_id: core.state.next_vehicle_id(),
                        provider_id: providers[provider.as_str()].clone(),
                        vehicle_type: vehicle_type.clone(),
                        cost_per_km: RatePerKm::new(*cost_per_km).map_err(ServiceError::validation)?,
                        home_location: GeoPoint::new(*lat, *lon).map_err(ServiceError::validation)?,
                        status: VehicleStatus::Available,
                    };
                    vehicles.insert(reference, vehicle.vehicle_id.clone());
                    svc.commit(core, Event::VehicleAdded { vehicle })?;
                    summary.vehicles += 1;
                }
                Command::Rating { customer, vehicle, stars } => {
                    let event = Event::RatingRecorded {
                        customer_id: customers[customer.as_str()].clone(),
                        vehicle_id: vehicles[vehicle.as_str()].clone(),
                        rating: *stars,
                    };
                    svc.commit(core, event)?;
                    summary.ratings += 1;
                }
                Command::Review { customer, provider, text, stars, at } => {
                    let review = Review::new(
                        core.state.next_review_id(),
                        customers[customer.as_str()].clone(),
                        providers[provider.as_str()].clone(),
                        None,
                        text.clone(),
                        *stars,
                        *at,
                    )
                    .map_err(ServiceError::validation)?;
                    svc.commit(core, Event::ReviewSubmitted { review, vehicle_id: None })?;
                    summary.reviews += 1;
                }
                Command::Path { vehicle, points, speed_kmh, interval_ms, start_ms } => {
                    let id = &vehicles[vehicle.as_str()];
                    let pts = points
                        .iter()
                        .map(|[lat, lon]| GeoPoint::new(*lat, *lon))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(ServiceError::validation)?;
                    let path = Polyline::new(pts).map_err(ServiceError::validation)?;
                    let track = core.state.tracks.track(id);
                    let mut cfg = TransmitterConfig::new(*speed_kmh, *interval_ms, *start_ms);
                    cfg.first_seq = track.as_ref().and_then(|t| t.last_seq()).map_or(1, |s| s + 1);
                    let last_ts = track.as_ref().and_then(|t| t.last()).map(|p| p.timestamp);
                    let msgs = simulate_transmitter(id, &path, cfg).map_err(ServiceError::validation)?;
                    for msg in msgs.into_iter().filter(|m| last_ts.is_none_or(|t| m.timestamp > t)) {
                        svc.commit(core, Event::TelemetryIngested { msg })?;
                        summary.fixes += 1;
                    }
                }
            }
        }
        svc.commit(core, Event::ScenarioSeeded { name: name.clone() })?;
        Ok(summary)
    })
}
