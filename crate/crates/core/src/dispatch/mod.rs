//! Vehicles, drivers and trips: the allocation decision, pricing and the
//! trip lifecycle.

mod schedule;
mod units;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_km, route_length_km, GeoError, GeoPoint, Polyline, TrackPoint};
use crate::ids::{CustomerId, DriverId, ProviderId, RequestId, TripId, VehicleId};

pub use schedule::{
    build_schedule, build_schedule_at, duration_ms, Schedule, ScheduleEntry, ScheduleItem,
    ScheduleOwner, DEFAULT_SPEED_KMH,
};
pub use units::{
    fuel_usage, trip_cost, trip_cost_km, FuelUnits, Km, Money, RatePerKm, UnitError,
    MINOR_PER_MAJOR,
};

pub const DEFAULT_MAX_RADIUS_KM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("request {0} is not pending")]
    InvalidState(RequestId),
    #[error("cannot apply {event} to a trip that is {from:?}")]
    IllegalTransition { from: TripState, event: &'static str },
    #[error(transparent)]
    Track(#[from] GeoError),
    #[error("trips {0} and {1} overlap")]
    Overlap(TripId, TripId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VehicleStatus {
    Available,
    Reserved,
    InTransit,
    OutOfService,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Vehicle {
    pub vehicle_id: VehicleId,
    pub provider_id: ProviderId,
    pub vehicle_type: String,
    pub cost_per_km: RatePerKm,
    pub home_location: GeoPoint,
    pub status: VehicleStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverStatus {
    Free,
    Assigned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Driver {
    pub driver_id: DriverId,
    pub provider_id: ProviderId,
    pub name: String,
    pub status: DriverStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequestStatus {
    Pending,
    Allocated,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TripRequest {
    pub request_id: RequestId,
    pub customer_id: CustomerId,
    pub pickup: GeoPoint,
    pub dropoff: GeoPoint,
    pub vehicle_type: String,
    /// Requested pickup time, ms since the epoch.
    pub requested_time: u64,
    pub max_radius_km: f64,
    pub created_at: u64,
    pub status: RequestStatus,
}

impl TripRequest {
    /// A pending request; rejects identical pickup and dropoff, a pickup time
    /// in the past and a non-positive radius.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        request_id: RequestId,
        customer_id: CustomerId,
        pickup: GeoPoint,
        dropoff: GeoPoint,
        vehicle_type: impl Into<String>,
        requested_time: u64,
        max_radius_km: f64,
        created_at: u64,
    ) -> Result<Self, DispatchError> {
        if pickup == dropoff {
            return Err(DispatchError::InvalidParam("pickup equals dropoff".into()));
        }
        if requested_time < created_at {
            return Err(DispatchError::InvalidParam(
                "requested time precedes creation".into(),
            ));
        }
        if !(max_radius_km.is_finite() && max_radius_km > 0.0) {
            return Err(DispatchError::InvalidParam("radius must be positive".into()));
        }
        Ok(Self {
            request_id,
            customer_id,
            pickup,
            dropoff,
            vehicle_type: vehicle_type.into(),
            requested_time,
            max_radius_km,
            created_at,
            status: RequestStatus::Pending,
        })
    }
}

/// A vehicle as allocation sees it: its record plus the last tracked fix.
#[derive(Debug, Clone, Copy)]
pub struct FleetView<'a> {
    pub vehicle: &'a Vehicle,
    pub position: Option<GeoPoint>,
}

impl FleetView<'_> {
    pub fn location(&self) -> GeoPoint {
        self.position.unwrap_or(self.vehicle.home_location)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NoVehicle,
    NoDriver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "outcome")]
pub enum Allocation {
    Accepted {
        vehicle_id: VehicleId,
        driver_id: DriverId,
        distance_km: f64,
    },
    Rejected {
        reason: RejectReason,
    },
}

/// Nearest available vehicle of the requested type within the radius whose
/// provider has a free driver. `NoVehicle` when nothing of the right type is
/// in range, `NoDriver` when vehicles are but none of their providers has a
/// free driver.
pub fn allocate(
    request: &TripRequest,
    fleet: &[FleetView<'_>],
    drivers: &[Driver],
) -> Result<Allocation, DispatchError> {
    if request.status != RequestStatus::Pending {
        return Err(DispatchError::InvalidState(request.request_id.clone()));
    }
    let mut in_range: Vec<(f64, &Vehicle)> = fleet
        .iter()
        .filter(|f| f.vehicle.status == VehicleStatus::Available)
        .filter(|f| f.vehicle.vehicle_type == request.vehicle_type)
        .map(|f| (haversine_km(f.location(), request.pickup), f.vehicle))
        .filter(|(d, _)| *d <= request.max_radius_km)
        .collect();
    if in_range.is_empty() {
        return Ok(Allocation::Rejected {
            reason: RejectReason::NoVehicle,
        });
    }
    in_range.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.vehicle_id.cmp(&b.1.vehicle_id)));

    for (distance_km, vehicle) in in_range {
        let driver = drivers
            .iter()
            .filter(|d| d.provider_id == vehicle.provider_id && d.status == DriverStatus::Free)
            .min_by(|a, b| a.driver_id.cmp(&b.driver_id));
        if let Some(driver) = driver {
            return Ok(Allocation::Accepted {
                vehicle_id: vehicle.vehicle_id.clone(),
                driver_id: driver.driver_id.clone(),
                distance_km,
            });
        }
    }
    Ok(Allocation::Rejected {
        reason: RejectReason::NoDriver,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripState {
    Scheduled,
    InTransit,
    Completed,
    Cancelled,
}

impl TripState {
    pub const ALL: [TripState; 4] = [
        TripState::Scheduled,
        TripState::InTransit,
        TripState::Completed,
        TripState::Cancelled,
    ];

    pub fn is_active(self) -> bool {
        matches!(self, TripState::Scheduled | TripState::InTransit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trip {
    pub trip_id: TripId,
    pub request_id: RequestId,
    pub customer_id: CustomerId,
    pub provider_id: ProviderId,
    pub vehicle_id: VehicleId,
    pub driver_id: DriverId,
    pub pickup: GeoPoint,
    pub dropoff: GeoPoint,
    pub requested_time: u64,
    pub planned_route: Polyline,
    pub planned_dr_km: Km,
    /// The vehicle's rate when the trip was booked.
    pub cost_per_km: RatePerKm,
    pub quoted_cost: Money,
    pub actual_dr_km: Option<Km>,
    pub final_cost: Option<Money>,
    pub fuel_units: Option<FuelUnits>,
    pub state: TripState,
}

impl Trip {
    /// A scheduled trip priced on the planned route.
    pub fn plan(
        trip_id: TripId,
        request: &TripRequest,
        vehicle: &Vehicle,
        driver_id: DriverId,
        planned_route: Polyline,
    ) -> Result<Self, DispatchError> {
        let planned_dr_km = Km::from_km(planned_route.length_km())?;
        let quoted_cost = trip_cost(planned_dr_km, vehicle.cost_per_km)?;
        Ok(Self {
            trip_id,
            request_id: request.request_id.clone(),
            customer_id: request.customer_id.clone(),
            provider_id: vehicle.provider_id.clone(),
            vehicle_id: vehicle.vehicle_id.clone(),
            driver_id,
            pickup: request.pickup,
            dropoff: request.dropoff,
            requested_time: request.requested_time,
            planned_route,
            planned_dr_km,
            cost_per_km: vehicle.cost_per_km,
            quoted_cost,
            actual_dr_km: None,
            final_cost: None,
            fuel_units: None,
            state: TripState::Scheduled,
        })
    }

    /// The amount owed: final cost once completed, otherwise the quote.
    pub fn payable(&self) -> Money {
        self.final_cost.unwrap_or(self.quoted_cost)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TripEvent {
    Start,
    Complete(Vec<TrackPoint>),
    Cancel,
}

impl TripEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TripEvent::Start => "start",
            TripEvent::Complete(_) => "complete",
            TripEvent::Cancel => "cancel",
        }
    }
}

/// A trip after an event, with the statuses its vehicle and driver must take
/// in the same step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub trip: Trip,
    pub vehicle_status: VehicleStatus,
    pub driver_status: DriverStatus,
}

pub fn transition(trip: &Trip, event: TripEvent) -> Result<Transition, DispatchError> {
    let mut next = trip.clone();
    let (vehicle_status, driver_status) = match (trip.state, &event) {
        (TripState::Scheduled, TripEvent::Start) => {
            next.state = TripState::InTransit;
            (VehicleStatus::InTransit, DriverStatus::Assigned)
        }
        (TripState::InTransit, TripEvent::Complete(track)) => {
            let actual = Km::from_km(route_length_km(track)?)?;
            let final_cost = trip_cost(actual, trip.cost_per_km)?;
            next.actual_dr_km = Some(actual);
            next.final_cost = Some(final_cost);
            next.fuel_units = Some(fuel_usage(final_cost, actual));
            next.state = TripState::Completed;
            (VehicleStatus::Available, DriverStatus::Free)
        }
        (TripState::Scheduled, TripEvent::Cancel) => {
            next.state = TripState::Cancelled;
            (VehicleStatus::Available, DriverStatus::Free)
        }
        (from, event) => {
            return Err(DispatchError::IllegalTransition {
                from,
                event: event.name(),
            })
        }
    };
    Ok(Transition {
        trip: next,
        vehicle_status,
        driver_status,
    })
}
