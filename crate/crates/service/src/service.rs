//! The logistics service: every role operation, funnelled through one event
//! log appender.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fleetline_core::dispatch::{
    self, allocate, build_schedule, Allocation, DispatchError, FleetView, RatePerKm, Schedule,
    ScheduleOwner, Trip, TripEvent, TripRequest, TripState, Vehicle, VehicleStatus,
    DEFAULT_MAX_RADIUS_KM,
};
use fleetline_core::geo::{haversine_km, GeoPoint, Polyline, TrackPoint};
use fleetline_core::ids::{CustomerId, DriverId, ProviderId, RequestId, TripId, VehicleId};
use fleetline_core::qr::{EcLevel, QrMatrix};
use fleetline_core::recommender::{recommend, FleetCandidate, Recommendation, RecommendError, RecommendationQuery};
use fleetline_core::reviews::{
    detect_spam_providers, rank_providers, sentiment_counts, star_lists, ProviderRank, Review,
    SentimentCounts, SentimentLexicon, SpamFlag, SpamPolicy, StopList,
};
use fleetline_core::tracking::{IngestOutcome, TelemetryMsg};
use fleetline_core::trip_qr::make_trip_qr;
use parking_lot::RwLock;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::auth::{permits, Action, Principal, Session, Sessions, Standing};
use crate::clock::Clock;
use crate::error::ServiceError;
use crate::events::{Event, EventLog, EventRecord, LogError};
use crate::model::{
    Account, ApprovalStatus, Customer, Notification, PasswordHash, PaymentRecord, PaymentStatus,
    Provider, Role, TripRecord,
};
use crate::state::State;

pub const ADMIN_LOGIN: &str = "admin";
pub const SNAPSHOT_EVERY: u64 = 10_000;
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const MAX_NAME_CHARS: usize = 200;
pub const MAX_MESSAGE_CHARS: usize = 1000;

type Result<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    pub qr_passphrase: Option<String>,
    /// Password for the bootstrap admin; a random one is generated when absent.
    pub admin_password: Option<String>,
    /// Snapshot interval in events; `None` means [`SNAPSHOT_EVERY`].
    pub snapshot_every: Option<u64>,
}

/// A coordinate pair as sent by clients, validated on use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn point(self) -> Result<GeoPoint> {
        GeoPoint::new(self.lat, self.lon).map_err(|_| ServiceError::InvalidLocation {
            lat: self.lat,
            lon: self.lon,
        })
    }
}

impl From<GeoPoint> for LatLon {
    fn from(p: GeoPoint) -> Self {
        Self {
            lat: p.lat(),
            lon: p.lon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Registration {
    pub name: String,
    pub login: String,
    pub password: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Credentials {
    pub login: String,
    pub password: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NewVehicle {
    pub vehicle_type: String,
    /// Minor currency units per km.
    pub cost_per_km: u64,
    pub location: LatLon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NewRequest {
    pub pickup: LatLon,
    pub dropoff: LatLon,
    pub vehicle_type: String,
    /// Defaults to now.
    pub requested_time: Option<u64>,
    pub max_radius_km: Option<f64>,
    /// Planned route from pickup to dropoff; defaults to the straight leg.
    pub route: Option<Vec<LatLon>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NewNotification {
    pub driver_id: DriverId,
    pub trip_id: Option<TripId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NewReview {
    pub trip_id: TripId,
    pub text: String,
    pub stars: u8,
}

/// Search filters for vehicles and recommendations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VehicleQuery {
    #[serde(rename = "type")]
    pub vehicle_type: Option<String>,
    /// Minor currency units per km.
    pub max_cost: Option<u64>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RequestOutcome {
    pub request: TripRequest,
    pub allocation: Allocation,
    pub trip: Option<Trip>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VehicleListing {
    #[serde(flatten)]
    pub vehicle: Vehicle,
    /// Last tracked position, or the home location.
    pub location: GeoPoint,
    pub distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProviderRequest {
    pub request: TripRequest,
    pub trip: TripRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct History {
    pub trips: Vec<TripRecord>,
    pub payments: Vec<PaymentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackView {
    pub vehicle_id: VehicleId,
    pub points: Vec<TrackPoint>,
    pub length_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PositionView {
    pub trip_id: TripId,
    pub vehicle_id: VehicleId,
    pub position: TrackPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TelemetryReceipt {
    pub outcome: IngestOutcome,
    /// Sequence number of the event recording the fix, when accepted.
    pub event_seq: Option<u64>,
}

/// The fields of a trip carried, sealed, inside its QR code. Serializing
/// through a `serde_json::Value` sorts the keys.
pub fn trip_summary(trip: &Trip) -> serde_json::Value {
    serde_json::json!({
        "tripId": trip.trip_id,
        "customerId": trip.customer_id,
        "providerId": trip.provider_id,
        "vehicleId": trip.vehicle_id,
        "pickup": trip.pickup,
        "dropoff": trip.dropoff,
        "cost": trip.payable(),
    })
}

pub fn trip_summary_bytes(trip: &Trip) -> Vec<u8> {
    serde_json::to_vec(&trip_summary(trip)).expect("summary serializes")
}

pub(crate) struct Core {
    pub(crate) state: State,
    log: Option<EventLog>,
    snapshot_path: Option<PathBuf>,
}

pub struct Service {
    core: RwLock<Core>,
    sessions: Sessions,
    clock: Arc<dyn Clock>,
    qr_passphrase: Option<String>,
    snapshot_every: u64,
    lexicon: SentimentLexicon,
    stoplist: StopList,
    generated_admin_password: Option<String>,
    decoy: PasswordHash,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    state: State,
}

fn check_text(field: &str, value: &str, max: usize) -> Result<()> {
    if value.trim().is_empty() {
        return Err(ServiceError::validation(format!("{field} must not be empty")));
    }
    if value.chars().count() > max {
        return Err(ServiceError::validation(format!("{field} is longer than {max} characters")));
    }
    Ok(())
}

fn check_registration(r: &Registration) -> Result<()> {
    check_text("name", &r.name, MAX_NAME_CHARS)?;
    let login_ok = (3..=64).contains(&r.login.len())
        && r.login
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b"._-".contains(&b));
    if !login_ok {
        return Err(ServiceError::validation(
            "login must be 3-64 characters of a-z, 0-9, '.', '_' or '-'",
        ));
    }
    if r.password.is_empty() || r.password.len() > 256 {
        return Err(ServiceError::validation("password must be 1-256 bytes"));
    }
    Ok(())
}

fn dispatch_error(e: DispatchError) -> ServiceError {
    match e {
        DispatchError::IllegalTransition { .. } => ServiceError::conflict("illegal-transition", e.to_string()),
        DispatchError::InvalidState(_) => ServiceError::conflict("invalid-state", e.to_string()),
        DispatchError::Overlap(..) => ServiceError::conflict("schedule-overlap", e.to_string()),
        other => ServiceError::validation(other),
    }
}

fn random_password() -> String {
    let mut raw = [0u8; 12];
    rand::rng().fill_bytes(&mut raw);
    hex::encode(raw)
}

impl Service {
    /// Opens the service on `data_dir`, replaying its log (from the latest
    /// snapshot when one is usable) and creating the admin on an empty log.
    pub fn open(data_dir: &Path, opts: ServiceOptions, clock: Arc<dyn Clock>) -> std::result::Result<Self, LogError> {
        let (log, records) = EventLog::open(data_dir)?;
        let snapshot_path = data_dir.join(SNAPSHOT_FILE);
        let state = load_state(&records, &snapshot_path)?;
        Self::assemble(
            Core {
                state,
                log: Some(log),
                snapshot_path: Some(snapshot_path),
            },
            opts,
            clock,
        )
    }

    /// A service without persistence.
    pub fn in_memory(opts: ServiceOptions, clock: Arc<dyn Clock>) -> Self {
        let core = Core {
            state: State::new(),
            log: None,
            snapshot_path: None,
        };
        Self::assemble(core, opts, clock).expect("in-memory bootstrap cannot fail")
    }

    fn assemble(core: Core, opts: ServiceOptions, clock: Arc<dyn Clock>) -> std::result::Result<Self, LogError> {
        let needs_admin = !core.state.has_admin();
        let (admin_password, generated) = match (&opts.admin_password, needs_admin) {
            (Some(p), _) => (p.clone(), None),
            (None, true) => {
                let p = random_password();
                (p.clone(), Some(p))
            }
            (None, false) => (String::new(), None),
        };
        let service = Self {
            core: RwLock::new(core),
            sessions: Sessions::new(),
            clock,
            qr_passphrase: opts.qr_passphrase,
            snapshot_every: opts.snapshot_every.unwrap_or(SNAPSHOT_EVERY).max(1),
            lexicon: SentimentLexicon::default(),
            stoplist: StopList::default(),
            generated_admin_password: generated,
            decoy: PasswordHash::with_salt("", &[0; 16]),
        };
        if needs_admin {
            let mut core = service.core.write();
            let account = Account {
                account_id: core.state.next_account_id(),
                login: ADMIN_LOGIN.into(),
                role: Role::Admin,
                password: PasswordHash::new(&admin_password),
                subject: String::new(),
            };
            service
                .commit(&mut core, Event::AdminBootstrapped { account })
                .map_err(|e| LogError::CorruptLog {
                    seq: 1,
                    message: e.to_string(),
                })?;
        }
        Ok(service)
    }

    /// The admin password made up at bootstrap, when none was configured.
    pub fn generated_admin_password(&self) -> Option<&str> {
        self.generated_admin_password.as_deref()
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    pub fn qr_configured(&self) -> bool {
        self.qr_passphrase.is_some()
    }

    pub fn lexicon(&self) -> (&SentimentLexicon, &StopList) {
        (&self.lexicon, &self.stoplist)
    }

    /// Runs `f` against a consistent view of the state.
    pub fn read<R>(&self, f: impl FnOnce(&State) -> R) -> R {
        f(&self.core.read().state)
    }

    pub fn canonical_state(&self) -> Vec<u8> {
        self.read(State::canonical_bytes)
    }

    pub fn seq(&self) -> u64 {
        self.read(|s| s.seq)
    }

    pub(crate) fn write<R, E>(&self, f: impl FnOnce(&Self, &mut Core) -> std::result::Result<R, E>) -> std::result::Result<R, E> {
        let mut core = self.core.write();
        f(self, &mut core)
    }

    /// Appends `event` to the log and folds it into the state.
    pub(crate) fn commit(&self, core: &mut Core, event: Event) -> Result<EventRecord> {
        let ts = self.clock.now_ms();
        let rec = match &mut core.log {
            Some(log) => log.append(ts, event)?,
            None => EventRecord {
                seq: core.state.seq + 1,
                ts,
                event,
            },
        };
        core.state.apply(&rec)?;
        if rec.seq % self.snapshot_every == 0 {
            if let Some(path) = &core.snapshot_path {
                write_snapshot(path, &core.state)?;
            }
        }
        Ok(rec)
    }

    fn allow(&self, state: &State, p: &Principal, action: Action) -> Result<()> {
        let standing = match p.role {
            Role::Admin => Standing::Admin,
            Role::Customer => Standing::Customer,
            Role::Driver => Standing::Driver,
            Role::Provider if state.provider_approved(&ProviderId::new(&p.subject)) => {
                Standing::ApprovedProvider
            }
            Role::Provider => Standing::PendingProvider,
        };
        if state.accounts.contains_key(&p.account_id) && permits(standing, action) {
            Ok(())
        } else {
            Err(ServiceError::Forbidden)
        }
    }

    /// Whether `p` may perform `action` right now, by role alone.
    pub fn authorize(&self, p: &Principal, action: Action) -> bool {
        self.read(|s| self.allow(s, p, action).is_ok())
    }

    // ----- sessions -----

    pub fn login(&self, login: &str, password: &str) -> Result<Session> {
        let account = self.read(|s| s.logins.get(login).and_then(|id| s.accounts.get(id)).cloned());
        let Some(account) = account else {
            // same key derivation cost as a real account
            let _ = self.decoy.verify(password);
            return Err(ServiceError::AuthFailure);
        };
        if !account.password.verify(password) {
            return Err(ServiceError::AuthFailure);
        }
        let principal = Principal {
            account_id: account.account_id,
            role: account.role,
            subject: account.subject,
        };
        Ok(self.sessions.issue(principal, self.now_ms()))
    }

    pub fn session(&self, token: &str) -> Result<Principal> {
        self.sessions
            .resolve(token, self.now_ms())
            .ok_or(ServiceError::Unauthenticated)
    }

    pub fn logout(&self, token: &str) -> Result<()> {
        let p = self.session(token)?;
        self.read(|s| self.allow(s, &p, Action::Logout))?;
        self.sessions.revoke(token);
        Ok(())
    }

    // ----- public -----

    pub fn register_provider(&self, r: &Registration) -> Result<Provider> {
        check_registration(r)?;
        let password = PasswordHash::new(&r.password);
        self.write(|svc, core| {
            if core.state.logins.contains_key(&r.login) {
                return Err(ServiceError::conflict("login-taken", format!("login {} is taken", r.login)));
            }
            let account_id = core.state.next_account_id();
            let provider = Provider {
                provider_id: core.state.next_provider_id(),
                account_id: account_id.clone(),
                name: r.name.clone(),
                status: ApprovalStatus::Pending,
            };
            let account = Account {
                account_id,
                login: r.login.clone(),
                role: Role::Provider,
                password,
                subject: provider.provider_id.to_string(),
            };
            svc.commit(core, Event::ProviderRegistered { account, provider: provider.clone() })?;
            Ok(provider)
        })
    }

    pub fn register_customer(&self, r: &Registration) -> Result<Customer> {
        check_registration(r)?;
        let password = PasswordHash::new(&r.password);
        self.write(|svc, core| {
            if core.state.logins.contains_key(&r.login) {
                return Err(ServiceError::conflict("login-taken", format!("login {} is taken", r.login)));
            }
            let account_id = core.state.next_account_id();
            let customer = Customer {
                customer_id: core.state.next_customer_id(),
                account_id: account_id.clone(),
                name: r.name.clone(),
            };
            let account = Account {
                account_id,
                login: r.login.clone(),
                role: Role::Customer,
                password,
                subject: customer.customer_id.to_string(),
            };
            svc.commit(core, Event::CustomerRegistered { account, customer: customer.clone() })?;
            Ok(customer)
        })
    }

    // ----- admin -----

    pub fn approve_provider(&self, p: &Principal, provider_id: &ProviderId) -> Result<Provider> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::ApproveProvider)?;
            let provider = core
                .state
                .providers
                .get(provider_id)
                .ok_or_else(|| ServiceError::not_found("provider", provider_id))?;
            if provider.status == ApprovalStatus::Approved {
                return Ok(provider.clone());
            }
            svc.commit(core, Event::ProviderApproved { provider_id: provider_id.clone() })?;
            Ok(core.state.providers[provider_id].clone())
        })
    }

    pub fn list_providers(&self, p: &Principal) -> Result<Vec<Provider>> {
        self.read(|s| {
            self.allow(s, p, Action::ListProviders)?;
            Ok(s.providers.values().cloned().collect())
        })
    }

    pub fn list_customers(&self, p: &Principal) -> Result<Vec<Customer>> {
        self.read(|s| {
            self.allow(s, p, Action::ListCustomers)?;
            Ok(s.customers.values().cloned().collect())
        })
    }

    pub fn list_all_vehicles(&self, p: &Principal) -> Result<Vec<Vehicle>> {
        self.read(|s| {
            self.allow(s, p, Action::ListAllVehicles)?;
            Ok(s.vehicles.values().cloned().collect())
        })
    }

    pub fn spam_report(&self, p: &Principal) -> Result<Vec<SpamFlag>> {
        self.read(|s| {
            self.allow(s, p, Action::SpamReport)?;
            Ok(detect_spam_providers(s.reviews.values(), &SpamPolicy::default(), &self.stoplist))
        })
    }

    pub fn rankings(&self, p: &Principal) -> Result<Vec<ProviderRank>> {
        self.read(|s| {
            self.allow(s, p, Action::Rankings)?;
            Ok(rank_providers(&star_lists(s.providers.keys(), s.reviews.values())))
        })
    }

    pub fn sentiment(&self, p: &Principal) -> Result<SentimentCounts> {
        self.read(|s| {
            self.allow(s, p, Action::SentimentReport)?;
            Ok(self.sentiment_of(s))
        })
    }

    /// Sentiment counts over every stored review.
    pub fn sentiment_of(&self, s: &State) -> SentimentCounts {
        sentiment_counts(s.reviews.values(), &self.lexicon, &self.stoplist)
    }

    // ----- provider -----

    fn own_provider(p: &Principal) -> ProviderId {
        ProviderId::new(&p.subject)
    }

    pub fn provider_profile(&self, p: &Principal) -> Result<Provider> {
        self.read(|s| {
            self.allow(s, p, Action::ReadProviderProfile)?;
            s.providers
                .get(&Self::own_provider(p))
                .cloned()
                .ok_or_else(|| ServiceError::not_found("provider", &p.subject))
        })
    }

    pub fn add_vehicle(&self, p: &Principal, v: &NewVehicle) -> Result<Vehicle> {
        check_text("vehicleType", &v.vehicle_type, MAX_NAME_CHARS)?;
        let home = v.location.point()?;
        let rate = RatePerKm::new(v.cost_per_km).map_err(ServiceError::validation)?;
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::AddVehicle)?;
            let vehicle = Vehicle {
                vehicle_id: core.state.next_vehicle_id(),
                provider_id: Self::own_provider(p),
                vehicle_type: v.vehicle_type.clone(),
                cost_per_km: rate,
                home_location: home,
                status: VehicleStatus::Available,
            };
            svc.commit(core, Event::VehicleAdded { vehicle: vehicle.clone() })?;
            Ok(vehicle)
        })
    }

    pub fn set_vehicle_status(&self, p: &Principal, id: &VehicleId, status: VehicleStatus) -> Result<Vehicle> {
        if !matches!(status, VehicleStatus::Available | VehicleStatus::OutOfService) {
            return Err(ServiceError::validation(
                "status can only be set to available or out-of-service",
            ));
        }
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::SetVehicleStatus)?;
            let v = core.state.vehicles.get(id).ok_or_else(|| ServiceError::not_found("vehicle", id))?;
            if v.provider_id != Self::own_provider(p) {
                return Err(ServiceError::Forbidden);
            }
            if core.state.active_trip_of_vehicle(id).is_some() {
                return Err(ServiceError::conflict("vehicle-busy", format!("vehicle {id} is on a trip")));
            }
            if v.status != status {
                svc.commit(core, Event::VehicleStatusSet { vehicle_id: id.clone(), status })?;
            }
            Ok(core.state.vehicles[id].clone())
        })
    }

    pub fn add_driver(&self, p: &Principal, r: &Registration) -> Result<dispatch::Driver> {
        check_registration(r)?;
        let password = PasswordHash::new(&r.password);
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::AddDriver)?;
            if core.state.logins.contains_key(&r.login) {
                return Err(ServiceError::conflict("login-taken", format!("login {} is taken", r.login)));
            }
            let driver = dispatch::Driver {
                driver_id: core.state.next_driver_id(),
                provider_id: Self::own_provider(p),
                name: r.name.clone(),
                status: dispatch::DriverStatus::Free,
            };
            let account = Account {
                account_id: core.state.next_account_id(),
                login: r.login.clone(),
                role: Role::Driver,
                password,
                subject: driver.driver_id.to_string(),
            };
            svc.commit(core, Event::DriverAdded { account, driver: driver.clone() })?;
            Ok(driver)
        })
    }

    pub fn provider_requests(&self, p: &Principal) -> Result<Vec<ProviderRequest>> {
        self.read(|s| {
            self.allow(s, p, Action::ListProviderRequests)?;
            let me = Self::own_provider(p);
            Ok(s.trips
                .values()
                .filter(|t| t.trip.provider_id == me)
                .filter_map(|t| {
                    Some(ProviderRequest {
                        request: s.requests.get(&t.trip.request_id)?.clone(),
                        trip: t.clone(),
                    })
                })
                .collect())
        })
    }

    pub fn notify_driver(&self, p: &Principal, n: &NewNotification) -> Result<Notification> {
        check_text("message", &n.message, MAX_MESSAGE_CHARS)?;
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::NotifyDriver)?;
            let me = Self::own_provider(p);
            let driver = core
                .state
                .drivers
                .get(&n.driver_id)
                .ok_or_else(|| ServiceError::not_found("driver", &n.driver_id))?;
            if driver.provider_id != me {
                return Err(ServiceError::Forbidden);
            }
            if let Some(t) = &n.trip_id {
                let trip = core.state.trips.get(t).ok_or_else(|| ServiceError::not_found("trip", t))?;
                if trip.trip.provider_id != me {
                    return Err(ServiceError::Forbidden);
                }
            }
            let notification = Notification {
                notification_id: core.state.next_notification_id(),
                provider_id: me,
                driver_id: n.driver_id.clone(),
                trip_id: n.trip_id.clone(),
                message: n.message.clone(),
                sent_at: svc.now_ms(),
            };
            svc.commit(core, Event::NotificationSent { notification: notification.clone() })?;
            Ok(notification)
        })
    }

    pub fn vehicle_schedule(&self, p: &Principal, id: &VehicleId) -> Result<Schedule> {
        self.read(|s| {
            self.allow(s, p, Action::ViewVehicleSchedule)?;
            let v = s.vehicles.get(id).ok_or_else(|| ServiceError::not_found("vehicle", id))?;
            if v.provider_id != Self::own_provider(p) {
                return Err(ServiceError::Forbidden);
            }
            let trips = s
                .trips
                .values()
                .filter(|t| &t.trip.vehicle_id == id && t.trip.state.is_active())
                .map(|t| &t.trip);
            build_schedule(ScheduleOwner::Vehicle(id.clone()), trips).map_err(dispatch_error)
        })
    }

    pub fn history(&self, p: &Principal) -> Result<History> {
        self.read(|s| {
            self.allow(s, p, Action::ViewHistory)?;
            let me = Self::own_provider(p);
            Ok(History {
                trips: s
                    .trips
                    .values()
                    .filter(|t| t.trip.provider_id == me && !t.trip.state.is_active())
                    .cloned()
                    .collect(),
                payments: s.payments.values().filter(|x| x.provider_id == me).cloned().collect(),
            })
        })
    }

    // ----- customer -----

    fn own_customer(p: &Principal) -> CustomerId {
        CustomerId::new(&p.subject)
    }

    fn location_of(s: &State, v: &Vehicle) -> GeoPoint {
        s.tracks
            .current_position(&v.vehicle_id)
            .map_or(v.home_location, |t| t.point)
    }

    fn query_point(q: &VehicleQuery) -> Result<Option<GeoPoint>> {
        match (q.lat, q.lon) {
            (Some(lat), Some(lon)) => LatLon { lat, lon }.point().map(Some),
            (None, None) => Ok(None),
            _ => Err(ServiceError::validation("lat and lon go together")),
        }
    }

    pub fn search_vehicles(&self, p: &Principal, q: &VehicleQuery) -> Result<Vec<VehicleListing>> {
        let near = Self::query_point(q)?;
        self.read(|s| {
            self.allow(s, p, Action::SearchVehicles)?;
            let mut out: Vec<VehicleListing> = s
                .vehicles
                .values()
                .filter(|v| v.status == VehicleStatus::Available)
                .filter(|v| q.vehicle_type.as_ref().is_none_or(|t| &v.vehicle_type == t))
                .filter(|v| q.max_cost.is_none_or(|m| v.cost_per_km.minor() <= m))
                .map(|v| {
                    let location = Self::location_of(s, v);
                    VehicleListing {
                        vehicle: v.clone(),
                        location,
                        distance_km: near.map(|n| haversine_km(n, location)),
                    }
                })
                .collect();
            if near.is_some() {
                out.sort_by(|a, b| {
                    a.distance_km
                        .unwrap_or(0.0)
                        .total_cmp(&b.distance_km.unwrap_or(0.0))
                        .then_with(|| a.vehicle.vehicle_id.cmp(&b.vehicle.vehicle_id))
                });
            }
            Ok(out)
        })
    }

    pub fn recommendations(&self, p: &Principal, q: &VehicleQuery) -> Result<Vec<Recommendation>> {
        let (Some(lat), Some(lon)) = (q.lat, q.lon) else {
            return Err(ServiceError::validation("lat and lon are required"));
        };
        let mut query = RecommendationQuery::new(Self::own_customer(p), lat, lon)
            .map_err(|_| ServiceError::InvalidLocation { lat, lon })?;
        if let Some(t) = &q.vehicle_type {
            query = query.vehicle_type(t.clone());
        }
        if let Some(m) = q.max_cost {
            query = query.max_cost_per_km(m as f64);
        }
        self.read(|s| {
            self.allow(s, p, Action::Recommend)?;
            let fleet: Vec<FleetCandidate> = s
                .vehicles
                .values()
                .map(|v| FleetCandidate {
                    vehicle_id: v.vehicle_id.clone(),
                    vehicle_type: v.vehicle_type.clone(),
                    location: Self::location_of(s, v),
                    cost_per_km: v.cost_per_km.minor() as f64,
                    available: v.status == VehicleStatus::Available,
                })
                .collect();
            match recommend(&s.ratings, &query, &fleet) {
                Ok(r) => Ok(r),
                Err(RecommendError::EmptyFleet) => Ok(Vec::new()),
                Err(e) => Err(ServiceError::validation(e)),
            }
        })
    }

    pub fn create_request(&self, p: &Principal, r: &NewRequest) -> Result<RequestOutcome> {
        let pickup = r.pickup.point()?;
        let dropoff = r.dropoff.point()?;
        check_text("vehicleType", &r.vehicle_type, MAX_NAME_CHARS)?;
        let route = match &r.route {
            None => vec![pickup, dropoff],
            Some(points) => {
                let route = points.iter().map(|x| x.point()).collect::<Result<Vec<_>>>()?;
                if route.first() != Some(&pickup) || route.last() != Some(&dropoff) {
                    return Err(ServiceError::validation("route must run from pickup to dropoff"));
                }
                route
            }
        };
        let route = Polyline::new(route).map_err(ServiceError::validation)?;
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::CreateRequest)?;
            let now = svc.now_ms();
            let request = TripRequest::new(
                core.state.next_request_id(),
                Self::own_customer(p),
                pickup,
                dropoff,
                r.vehicle_type.clone(),
                r.requested_time.unwrap_or(now),
                r.max_radius_km.unwrap_or(DEFAULT_MAX_RADIUS_KM),
                now,
            )
            .map_err(dispatch_error)?;
            svc.commit(core, Event::RequestCreated { request: request.clone() })?;

            let s = &core.state;
            let fleet: Vec<FleetView<'_>> = s
                .vehicles
                .values()
                .map(|v| FleetView {
                    vehicle: v,
                    position: s.tracks.current_position(&v.vehicle_id).map(|t| t.point),
                })
                .collect();
            let drivers: Vec<_> = s.drivers.values().cloned().collect();
            let allocation = allocate(&request, &fleet, &drivers).map_err(dispatch_error)?;
            let (event, trip) = match &allocation {
                Allocation::Accepted { vehicle_id, driver_id, .. } => {
                    let trip = Trip::plan(
                        s.next_trip_id(),
                        &request,
                        &s.vehicles[vehicle_id],
                        driver_id.clone(),
                        route,
                    )
                    .map_err(dispatch_error)?;
                    let event = Event::RequestAllocated {
                        request_id: request.request_id.clone(),
                        trip: trip.clone(),
                    };
                    (event, Some(trip))
                }
                Allocation::Rejected { reason } => (
                    Event::RequestRejected {
                        request_id: request.request_id.clone(),
                        reason: *reason,
                    },
                    None,
                ),
            };
            svc.commit(core, event)?;
            Ok(RequestOutcome {
                request: core.state.requests[&request.request_id].clone(),
                allocation,
                trip,
            })
        })
    }

    fn customer_trip<'s>(s: &'s State, p: &Principal, id: &TripId) -> Result<&'s TripRecord> {
        let t = s.trips.get(id).ok_or_else(|| ServiceError::not_found("trip", id))?;
        if t.trip.customer_id != Self::own_customer(p) {
            return Err(ServiceError::Forbidden);
        }
        Ok(t)
    }

    pub fn trip_position(&self, p: &Principal, id: &TripId) -> Result<PositionView> {
        self.read(|s| {
            self.allow(s, p, Action::ViewTripPosition)?;
            let t = Self::customer_trip(s, p, id)?;
            let position = s
                .tracks
                .current_position(&t.trip.vehicle_id)
                .ok_or_else(|| ServiceError::not_found("position for trip", id))?;
            Ok(PositionView {
                trip_id: id.clone(),
                vehicle_id: t.trip.vehicle_id.clone(),
                position,
            })
        })
    }

    pub fn pay(&self, p: &Principal, id: &TripId) -> Result<PaymentRecord> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::PayTrip)?;
            let t = Self::customer_trip(&core.state, p, id)?;
            if t.payment_id.is_some() {
                return Err(ServiceError::conflict("already-paid", format!("trip {id} is already paid")));
            }
            let Some(amount) = t.trip.final_cost.filter(|_| t.trip.state == TripState::Completed) else {
                return Err(ServiceError::conflict("not-completed", format!("trip {id} is not completed")));
            };
            let payment = PaymentRecord {
                payment_id: core.state.next_payment_id(),
                trip_id: id.clone(),
                customer_id: t.trip.customer_id.clone(),
                provider_id: t.trip.provider_id.clone(),
                amount,
                status: PaymentStatus::Recorded,
                recorded_at: svc.now_ms(),
            };
            svc.commit(core, Event::PaymentRecorded { payment: payment.clone() })?;
            Ok(payment)
        })
    }

    pub fn submit_review(&self, p: &Principal, r: &NewReview) -> Result<Review> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::SubmitReview)?;
            let t = Self::customer_trip(&core.state, p, &r.trip_id)?;
            if t.payment_id.is_none() {
                return Err(ServiceError::conflict("not-paid", format!("trip {} is not paid", r.trip_id)));
            }
            if t.review_id.is_some() {
                return Err(ServiceError::conflict(
                    "already-reviewed",
                    format!("trip {} already has a review", r.trip_id),
                ));
            }
            let review = Review::new(
                core.state.next_review_id(),
                t.trip.customer_id.clone(),
                t.trip.provider_id.clone(),
                Some(r.trip_id.clone()),
                r.text.clone(),
                r.stars,
                svc.now_ms(),
            )
            .map_err(ServiceError::validation)?;
            let vehicle_id = Some(t.trip.vehicle_id.clone());
            svc.commit(core, Event::ReviewSubmitted { review: review.clone(), vehicle_id })?;
            Ok(review)
        })
    }

    /// The trip summary sealed with the service passphrase, as a QR symbol.
    pub fn trip_qr(&self, p: &Principal, id: &TripId, ec: EcLevel) -> Result<QrMatrix> {
        let trip = self.read(|s| {
            self.allow(s, p, Action::FetchTripQr)?;
            Ok::<_, ServiceError>(Self::customer_trip(s, p, id)?.trip.clone())
        })?;
        let pass = self.qr_passphrase.as_deref().ok_or(ServiceError::QrUnavailable)?;
        make_trip_qr(&trip_summary_bytes(&trip), pass, ec).map_err(|e| ServiceError::Storage(e.to_string()))
    }

    // ----- driver -----

    fn own_driver(p: &Principal) -> DriverId {
        DriverId::new(&p.subject)
    }

    pub fn driver_requests(&self, p: &Principal) -> Result<Vec<TripRecord>> {
        self.read(|s| {
            self.allow(s, p, Action::ViewDriverRequests)?;
            let me = Self::own_driver(p);
            Ok(s.trips
                .values()
                .filter(|t| t.trip.driver_id == me && t.trip.state == TripState::Scheduled)
                .cloned()
                .collect())
        })
    }

    /// Accepting a request starts its trip.
    pub fn accept_request(&self, p: &Principal, request_id: &RequestId) -> Result<TripRecord> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::AcceptRequest)?;
            if !core.state.requests.contains_key(request_id) {
                return Err(ServiceError::not_found("request", request_id));
            }
            let t = core
                .state
                .trips
                .values()
                .find(|t| &t.trip.request_id == request_id)
                .ok_or_else(|| ServiceError::conflict("not-allocated", format!("request {request_id} has no trip")))?;
            if t.trip.driver_id != Self::own_driver(p) {
                return Err(ServiceError::Forbidden);
            }
            dispatch::transition(&t.trip, TripEvent::Start).map_err(dispatch_error)?;
            let trip_id = t.trip.trip_id.clone();
            svc.commit(core, Event::TripStarted { trip_id: trip_id.clone(), at: svc.now_ms() })?;
            Ok(core.state.trips[&trip_id].clone())
        })
    }

    /// Completes the trip over the fixes its vehicle sent since the start.
    pub fn complete_trip(&self, p: &Principal, id: &TripId) -> Result<TripRecord> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::CompleteTrip)?;
            let t = core.state.trips.get(id).ok_or_else(|| ServiceError::not_found("trip", id))?;
            if t.trip.driver_id != Self::own_driver(p) {
                return Err(ServiceError::Forbidden);
            }
            let now = svc.now_ms();
            let track = match (t.started_at, core.state.tracks.track(&t.trip.vehicle_id)) {
                (Some(from), Some(track)) => track.between(from, now),
                _ => Vec::new(),
            };
            let next = dispatch::transition(&t.trip, TripEvent::Complete(track)).map_err(dispatch_error)?;
            svc.commit(core, Event::TripCompleted { trip: next.trip, at: now })?;
            Ok(core.state.trips[id].clone())
        })
    }

    pub fn driver_schedule(&self, p: &Principal) -> Result<Schedule> {
        self.read(|s| {
            self.allow(s, p, Action::ViewDriverSchedule)?;
            let me = Self::own_driver(p);
            let trips = s
                .trips
                .values()
                .filter(|t| t.trip.driver_id == me && t.trip.state.is_active())
                .map(|t| &t.trip);
            build_schedule(ScheduleOwner::Driver(me.clone()), trips).map_err(dispatch_error)
        })
    }

    /// The driver's inbox in send order.
    pub fn driver_notifications(&self, p: &Principal) -> Result<Vec<Notification>> {
        self.read(|s| {
            self.allow(s, p, Action::ReadNotifications)?;
            let me = Self::own_driver(p);
            Ok(s.notifications.values().filter(|n| n.driver_id == me).cloned().collect())
        })
    }

    // ----- shared -----

    fn vehicle_provider_of(s: &State, p: &Principal) -> Option<ProviderId> {
        match p.role {
            Role::Provider => Some(Self::own_provider(p)),
            Role::Driver => s.drivers.get(&Self::own_driver(p)).map(|d| d.provider_id.clone()),
            _ => None,
        }
    }

    /// A stale fix is reported, not logged.
    pub fn ingest_telemetry(&self, p: &Principal, msg: &TelemetryMsg) -> Result<TelemetryReceipt> {
        self.write(|svc, core| {
            let s = &core.state;
            svc.allow(s, p, Action::PostTelemetry)?;
            let v = s
                .vehicles
                .get(&msg.vehicle_id)
                .ok_or_else(|| ServiceError::not_found("vehicle", &msg.vehicle_id))?;
            if Self::vehicle_provider_of(s, p).as_ref() != Some(&v.provider_id) {
                return Err(ServiceError::Forbidden);
            }
            let fresh = match s.tracks.track(&msg.vehicle_id) {
                None => true,
                Some(t) => {
                    t.last_seq().is_none_or(|q| msg.seq > q)
                        && t.last().is_none_or(|l| msg.timestamp > l.timestamp)
                }
            };
            if !fresh {
                return Ok(TelemetryReceipt {
                    outcome: IngestOutcome::RejectedStale,
                    event_seq: None,
                });
            }
            let rec = svc.commit(core, Event::TelemetryIngested { msg: msg.clone() })?;
            Ok(TelemetryReceipt {
                outcome: IngestOutcome::Accepted,
                event_seq: Some(rec.seq),
            })
        })
    }

    pub fn vehicle_track(&self, p: &Principal, id: &VehicleId) -> Result<TrackView> {
        self.read(|s| {
            self.allow(s, p, Action::ViewTrack)?;
            let v = s.vehicles.get(id).ok_or_else(|| ServiceError::not_found("vehicle", id))?;
            let allowed = match p.role {
                Role::Admin => true,
                Role::Provider => v.provider_id == Self::own_provider(p),
                Role::Customer => {
                    let me = Self::own_customer(p);
                    s.trips.values().any(|t| &t.trip.vehicle_id == id && t.trip.customer_id == me)
                }
                Role::Driver => false,
            };
            if !allowed {
                return Err(ServiceError::Forbidden);
            }
            let track = s.tracks.track(id);
            Ok(TrackView {
                vehicle_id: id.clone(),
                points: track.as_ref().map(|t| t.to_points()).unwrap_or_default(),
                length_km: track.map_or(0.0, |t| t.length_km()),
            })
        })
    }

    fn involves(p: &Principal, t: &Trip) -> bool {
        match p.role {
            Role::Admin => true,
            Role::Provider => t.provider_id.as_str() == p.subject,
            Role::Customer => t.customer_id.as_str() == p.subject,
            Role::Driver => t.driver_id.as_str() == p.subject,
        }
    }

    pub fn list_trips(&self, p: &Principal) -> Result<Vec<TripRecord>> {
        self.read(|s| {
            self.allow(s, p, Action::ListTrips)?;
            Ok(s.trips.values().filter(|t| Self::involves(p, &t.trip)).cloned().collect())
        })
    }

    pub fn get_trip(&self, p: &Principal, id: &TripId) -> Result<TripRecord> {
        self.read(|s| {
            self.allow(s, p, Action::ViewTrip)?;
            let t = s.trips.get(id).ok_or_else(|| ServiceError::not_found("trip", id))?;
            if !Self::involves(p, &t.trip) {
                return Err(ServiceError::Forbidden);
            }
            Ok(t.clone())
        })
    }

    pub fn cancel_trip(&self, p: &Principal, id: &TripId) -> Result<TripRecord> {
        self.write(|svc, core| {
            svc.allow(&core.state, p, Action::CancelTrip)?;
            let t = core.state.trips.get(id).ok_or_else(|| ServiceError::not_found("trip", id))?;
            if !Self::involves(p, &t.trip) {
                return Err(ServiceError::Forbidden);
            }
            dispatch::transition(&t.trip, TripEvent::Cancel).map_err(dispatch_error)?;
            svc.commit(core, Event::TripCancelled { trip_id: id.clone(), at: svc.now_ms() })?;
            Ok(core.state.trips[id].clone())
        })
    }
}

fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let snap = serde_json::to_vec(&serde_json::json!({ "seq": state.seq, "state": state }))
        .map_err(|e| ServiceError::Storage(e.to_string()))?;
    std::fs::write(&tmp, snap)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| ServiceError::Storage(e.to_string()))
}

/// State after `records`, starting from the snapshot when it covers a prefix
/// of them and falling back to a full replay otherwise.
fn load_state(records: &[EventRecord], snapshot: &Path) -> std::result::Result<State, LogError> {
    let from_snapshot = std::fs::read(snapshot)
        .ok()
        .and_then(|b| serde_json::from_slice::<Snapshot>(&b).ok())
        .filter(|s| s.seq == s.state.seq && s.seq as usize <= records.len());
    let (mut state, rest) = match from_snapshot {
        Some(s) => {
            let n = s.seq as usize;
            (s.state, &records[n..])
        }
        None => (State::new(), records),
    };
    for r in rest {
        state.apply(r).map_err(|e| LogError::CorruptLog {
            seq: e.seq,
            message: e.message,
        })?;
    }
    Ok(state)
}

/// State of the data directory's log without opening it for writing.
pub fn replay_dir(data_dir: &Path) -> std::result::Result<State, LogError> {
    let records = crate::events::read_log(&data_dir.join(crate::events::LOG_FILE))?;
    load_state(&records, &data_dir.join(SNAPSHOT_FILE))
}
