//! In-memory state as a pure fold over the event log.

use std::collections::{BTreeMap, BTreeSet};

use fleetline_core::dispatch::{
    Driver, DriverStatus, RequestStatus, TripRequest, TripState, Vehicle, VehicleStatus,
};
use fleetline_core::ids::{
    AccountId, CustomerId, DriverId, NotificationId, PaymentId, ProviderId, RequestId, ReviewId,
    TripId, VehicleId,
};
use fleetline_core::recommender::RatingMatrix;
use fleetline_core::reviews::Review;
use fleetline_core::tracking::{IngestOutcome, TrackStore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Event, EventRecord};
use crate::model::{
    Account, ApprovalStatus, Customer, Notification, PaymentRecord, Provider, Role, TripRecord,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {seq} cannot be applied: {message}")]
pub struct ApplyError {
    pub seq: u64,
    pub message: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct State {
    /// Sequence number of the last applied event.
    pub seq: u64,
    pub accounts: BTreeMap<AccountId, Account>,
    pub logins: BTreeMap<String, AccountId>,
    pub providers: BTreeMap<ProviderId, Provider>,
    pub customers: BTreeMap<CustomerId, Customer>,
    pub drivers: BTreeMap<DriverId, Driver>,
    pub vehicles: BTreeMap<VehicleId, Vehicle>,
    pub requests: BTreeMap<RequestId, TripRequest>,
    pub trips: BTreeMap<TripId, TripRecord>,
    pub payments: BTreeMap<PaymentId, PaymentRecord>,
    pub reviews: BTreeMap<ReviewId, Review>,
    pub ratings: RatingMatrix,
    pub notifications: BTreeMap<NotificationId, Notification>,
    pub tracks: TrackStore,
    pub scenarios: BTreeSet<String>,
}

fn next_id(prefix: &str, taken: usize) -> String {
    format!("{prefix}{:06}", taken + 1)
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds `records` into an empty state.
    pub fn replay<'a>(records: impl IntoIterator<Item = &'a EventRecord>) -> Result<Self, ApplyError> {
        let mut s = Self::new();
        for r in records {
            s.apply(r)?;
        }
        Ok(s)
    }

    /// The canonical serialization two equal states share byte for byte.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("state serializes")
    }

    pub fn has_admin(&self) -> bool {
        self.accounts.values().any(|a| a.role == Role::Admin)
    }

    pub fn next_account_id(&self) -> AccountId {
        AccountId::new(next_id("A", self.accounts.len()))
    }
    pub fn next_provider_id(&self) -> ProviderId {
        ProviderId::new(next_id("P", self.providers.len()))
    }
    pub fn next_customer_id(&self) -> CustomerId {
        CustomerId::new(next_id("C", self.customers.len()))
    }
    pub fn next_driver_id(&self) -> DriverId {
        DriverId::new(next_id("D", self.drivers.len()))
    }
    pub fn next_vehicle_id(&self) -> VehicleId {
        VehicleId::new(next_id("V", self.vehicles.len()))
    }
    pub fn next_request_id(&self) -> RequestId {
        RequestId::new(next_id("Q", self.requests.len()))
    }
    pub fn next_trip_id(&self) -> TripId {
        TripId::new(next_id("T", self.trips.len()))
    }
    pub fn next_payment_id(&self) -> PaymentId {
        PaymentId::new(next_id("PAY", self.payments.len()))
    }
    pub fn next_review_id(&self) -> ReviewId {
        ReviewId::new(next_id("R", self.reviews.len()))
    }
    pub fn next_notification_id(&self) -> NotificationId {
        NotificationId::new(next_id("N", self.notifications.len()))
    }

    pub fn provider_approved(&self, id: &ProviderId) -> bool {
        self.providers
            .get(id)
            .is_some_and(|p| p.status == ApprovalStatus::Approved)
    }

    /// The trip currently holding `vehicle`, if any.
    pub fn active_trip_of_vehicle(&self, vehicle: &VehicleId) -> Option<&TripRecord> {
        self.trips
            .values()
            .find(|t| &t.trip.vehicle_id == vehicle && t.trip.state.is_active())
    }

    pub fn apply(&mut self, rec: &EventRecord) -> Result<(), ApplyError> {
        if rec.seq != self.seq + 1 {
            return Err(ApplyError {
                seq: rec.seq,
                message: format!("expected seq {}", self.seq + 1),
            });
        }
        self.apply_event(&rec.event).map_err(|message| ApplyError {
            seq: rec.seq,
            message,
        })?;
        self.seq = rec.seq;
        Ok(())
    }

    fn add_account(&mut self, account: &Account) -> Result<(), String> {
        if self.logins.contains_key(&account.login) {
            return Err(format!("login {} already taken", account.login));
        }
        self.logins.insert(account.login.clone(), account.account_id.clone());
        self.accounts.insert(account.account_id.clone(), account.clone());
        Ok(())
    }

    fn trip_mut(&mut self, id: &TripId) -> Result<&mut TripRecord, String> {
        self.trips.get_mut(id).ok_or_else(|| format!("unknown trip {id}"))
    }

    fn set_statuses(
        &mut self,
        vehicle: &VehicleId,
        vs: VehicleStatus,
        driver: &DriverId,
        ds: DriverStatus,
    ) -> Result<(), String> {
        self.vehicles
            .get_mut(vehicle)
            .ok_or_else(|| format!("unknown vehicle {vehicle}"))?
            .status = vs;
        self.drivers
            .get_mut(driver)
            .ok_or_else(|| format!("unknown driver {driver}"))?
            .status = ds;
        Ok(())
    }

    fn apply_event(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::AdminBootstrapped { account } => self.add_account(account)?,
            Event::ProviderRegistered { account, provider } => {
                self.add_account(account)?;
                self.providers.insert(provider.provider_id.clone(), provider.clone());
            }
            Event::ProviderApproved { provider_id } => {
                self.providers
                    .get_mut(provider_id)
                    .ok_or_else(|| format!("unknown provider {provider_id}"))?
                    .status = ApprovalStatus::Approved;
            }
            Event::CustomerRegistered { account, customer } => {
                self.add_account(account)?;
                self.customers.insert(customer.customer_id.clone(), customer.clone());
            }
            Event::DriverAdded { account, driver } => {
                self.add_account(account)?;
                self.drivers.insert(driver.driver_id.clone(), driver.clone());
            }
            Event::VehicleAdded { vehicle } => {
                self.vehicles.insert(vehicle.vehicle_id.clone(), vehicle.clone());
            }
            Event::VehicleStatusSet { vehicle_id, status } => {
                self.vehicles
                    .get_mut(vehicle_id)
                    .ok_or_else(|| format!("unknown vehicle {vehicle_id}"))?
                    .status = *status;
            }
            Event::RequestCreated { request } => {
                self.requests.insert(request.request_id.clone(), request.clone());
            }
            Event::RequestAllocated { request_id, trip } => {
                let req = self
                    .requests
                    .get_mut(request_id)
                    .ok_or_else(|| format!("unknown request {request_id}"))?;
                req.status = RequestStatus::Allocated;
                let allocated_at = req.created_at;
                self.set_statuses(
                    &trip.vehicle_id,
                    VehicleStatus::Reserved,
                    &trip.driver_id,
                    DriverStatus::Assigned,
                )?;
                self.trips.insert(
                    trip.trip_id.clone(),
                    TripRecord {
                        trip: trip.clone(),
                        allocated_at,
                        started_at: None,
                        completed_at: None,
                        cancelled_at: None,
                        payment_id: None,
                        review_id: None,
                    },
                );
            }
            Event::RequestRejected { request_id, .. } => {
                self.requests
                    .get_mut(request_id)
                    .ok_or_else(|| format!("unknown request {request_id}"))?
                    .status = RequestStatus::Rejected;
            }
            Event::TripStarted { trip_id, at } => {
                let rec = self.trip_mut(trip_id)?;
                rec.trip.state = TripState::InTransit;
                rec.started_at = Some(*at);
                let (v, d) = (rec.trip.vehicle_id.clone(), rec.trip.driver_id.clone());
                self.set_statuses(&v, VehicleStatus::InTransit, &d, DriverStatus::Assigned)?;
            }
            Event::TelemetryIngested { msg } => {
                if self.tracks.ingest(msg) != IngestOutcome::Accepted {
                    return Err(format!("stale fix {} for {}", msg.seq, msg.vehicle_id));
                }
            }
            Event::TripCompleted { trip, at } => {
                let rec = self.trip_mut(&trip.trip_id)?;
                rec.trip = trip.clone();
                rec.completed_at = Some(*at);
                self.set_statuses(
                    &trip.vehicle_id,
                    VehicleStatus::Available,
                    &trip.driver_id,
                    DriverStatus::Free,
                )?;
            }
            Event::TripCancelled { trip_id, at } => {
                let rec = self.trip_mut(trip_id)?;
                rec.trip.state = TripState::Cancelled;
                rec.cancelled_at = Some(*at);
                let (v, d) = (rec.trip.vehicle_id.clone(), rec.trip.driver_id.clone());
                self.set_statuses(&v, VehicleStatus::Available, &d, DriverStatus::Free)?;
            }
            Event::PaymentRecorded { payment } => {
                self.trip_mut(&payment.trip_id)?.payment_id = Some(payment.payment_id.clone());
                self.payments.insert(payment.payment_id.clone(), payment.clone());
            }
            Event::ReviewSubmitted { review, vehicle_id } => {
                if let Some(trip_id) = &review.trip_id {
                    self.trip_mut(trip_id)?.review_id = Some(review.review_id.clone());
                }
                if let Some(v) = vehicle_id {
                    self.ratings
                        .insert(review.customer_id.clone(), v.clone(), review.stars as f64)
                        .map_err(|e| e.to_string())?;
                }
                self.reviews.insert(review.review_id.clone(), review.clone());
            }
            Event::RatingRecorded {
                customer_id,
                vehicle_id,
                rating,
            } => {
                self.ratings
                    .insert(customer_id.clone(), vehicle_id.clone(), *rating)
                    .map_err(|e| e.to_string())?;
            }
            Event::NotificationSent { notification } => {
                self.notifications
                    .insert(notification.notification_id.clone(), notification.clone());
            }
            Event::ScenarioSeeded { name } => {
                self.scenarios.insert(name.clone());
            }
        }
        Ok(())
    }
}
