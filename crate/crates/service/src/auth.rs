//! Sessions and the role/action permission matrix.

use std::collections::HashMap;

use fleetline_core::ids::AccountId;
use parking_lot::Mutex;
use rand::RngCore;
use serde::Serialize;

use crate::model::Role;

pub const SESSION_TTL_MS: u64 = 24 * 60 * 60 * 1000;
pub const TOKEN_BYTES: usize = 32;

/// A role as far as permissions go: providers split by approval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Standing {
    Admin,
    PendingProvider,
    ApprovedProvider,
    Customer,
    Driver,
}

impl Standing {
    pub const ALL: [Standing; 5] = [
        Standing::Admin,
        Standing::PendingProvider,
        Standing::ApprovedProvider,
        Standing::Customer,
        Standing::Driver,
    ];
}

/// Everything an authenticated caller can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    ApproveProvider,
    ListProviders,
    ListCustomers,
    ListAllVehicles,
    SpamReport,
    Rankings,
    SentimentReport,

    ReadProviderProfile,
    AddVehicle,
    SetVehicleStatus,
    AddDriver,
    ListProviderRequests,
    NotifyDriver,
    ViewVehicleSchedule,
    ViewHistory,

    SearchVehicles,
    CreateRequest,
    Recommend,
    ViewTripPosition,
    PayTrip,
    SubmitReview,
    FetchTripQr,

    ViewDriverRequests,
    AcceptRequest,
    CompleteTrip,
    ViewDriverSchedule,
    ReadNotifications,

    PostTelemetry,
    ViewTrack,
    ListTrips,
    ViewTrip,
    CancelTrip,
    Logout,
}

impl Action {
    pub const ALL: [Action; 33] = [
        Action::ApproveProvider,
        Action::ListProviders,
        Action::ListCustomers,
        Action::ListAllVehicles,
        Action::SpamReport,
        Action::Rankings,
        Action::SentimentReport,
        Action::ReadProviderProfile,
        Action::AddVehicle,
        Action::SetVehicleStatus,
        Action::AddDriver,
        Action::ListProviderRequests,
        Action::NotifyDriver,
        Action::ViewVehicleSchedule,
        Action::ViewHistory,
        Action::SearchVehicles,
        Action::CreateRequest,
        Action::Recommend,
        Action::ViewTripPosition,
        Action::PayTrip,
        Action::SubmitReview,
        Action::FetchTripQr,
        Action::ViewDriverRequests,
        Action::AcceptRequest,
        Action::CompleteTrip,
        Action::ViewDriverSchedule,
        Action::ReadNotifications,
        Action::PostTelemetry,
        Action::ViewTrack,
        Action::ListTrips,
        Action::ViewTrip,
        Action::CancelTrip,
        Action::Logout,
    ];
}

/// The permission matrix. Ownership of the entity involved is checked
/// separately by each operation.
pub fn permits(who: Standing, action: Action) -> bool {
    use Action::*;
    use Standing::*;
    match action {
        ApproveProvider | ListProviders | ListCustomers | ListAllVehicles | SpamReport
        | Rankings | SentimentReport => who == Admin,
        ReadProviderProfile => matches!(who, PendingProvider | ApprovedProvider),
        AddVehicle | SetVehicleStatus | AddDriver | ListProviderRequests | NotifyDriver
        | ViewVehicleSchedule | ViewHistory => who == ApprovedProvider,
        SearchVehicles | CreateRequest | Recommend | ViewTripPosition | PayTrip | SubmitReview
        | FetchTripQr => who == Customer,
        ViewDriverRequests | AcceptRequest | CompleteTrip | ViewDriverSchedule
        | ReadNotifications => who == Driver,
        PostTelemetry => matches!(who, ApprovedProvider | Driver),
        ViewTrack => matches!(who, Admin | ApprovedProvider | Customer),
        ListTrips | ViewTrip => matches!(who, Admin | ApprovedProvider | Customer | Driver),
        CancelTrip => matches!(who, ApprovedProvider | Customer),
        Logout => true,
    }
}

/// Who is calling, as resolved from a session token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Principal {
    pub account_id: AccountId,
    pub role: Role,
    /// Provider, customer or driver id; empty for the admin.
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub token: String,
    pub account_id: AccountId,
    pub role: Role,
    pub expires_at: u64,
}

/// Live sessions. They are not part of the event log, so a restart logs
/// everyone out.
#[derive(Debug, Default)]
pub struct Sessions {
    live: Mutex<HashMap<String, (Principal, u64)>>,
}

impl Sessions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issue(&self, principal: Principal, now_ms: u64) -> Session {
        let mut raw = [0u8; TOKEN_BYTES];
        rand::rng().fill_bytes(&mut raw);
        let token = hex::encode(raw);
        let expires_at = now_ms.saturating_add(SESSION_TTL_MS);
        let session = Session {
            token: token.clone(),
            account_id: principal.account_id.clone(),
            role: principal.role,
            expires_at,
        };
        let mut live = self.live.lock();
        live.retain(|_, (_, exp)| *exp > now_ms);
        live.insert(token, (principal, expires_at));
        session
    }

    /// The principal behind an unexpired token.
    pub fn resolve(&self, token: &str, now_ms: u64) -> Option<Principal> {
        let mut live = self.live.lock();
        match live.get(token) {
            Some((p, exp)) if *exp > now_ms => Some(p.clone()),
            Some(_) => {
                live.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.live.lock().remove(token).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn principal() -> Principal {
        Principal {
            account_id: AccountId::new("A000001"),
            role: Role::Admin,
            subject: String::new(),
        }
    }

    #[test]
    fn tokens_are_random_hex_and_expire() {
        let s = Sessions::new();
        let a = s.issue(principal(), 0);
        let b = s.issue(principal(), 0);
        assert_eq!(a.token.len(), 2 * TOKEN_BYTES);
        assert_ne!(a.token, b.token);
        assert!(s.resolve(&a.token, SESSION_TTL_MS - 1).is_some());
        assert!(s.resolve(&a.token, SESSION_TTL_MS).is_none());
        assert!(s.resolve(&a.token, 0).is_none());
        assert!(s.revoke(&b.token));
        assert!(s.resolve(&b.token, 0).is_none());
    }

    #[test]
    fn pending_providers_may_only_read_their_profile() {
        for a in Action::ALL {
            let want = matches!(a, Action::ReadProviderProfile | Action::Logout);
            assert_eq!(permits(Standing::PendingProvider, a), want, "{a:?}");
        }
    }

    #[test]
    fn every_action_has_an_owner() {
        for a in Action::ALL {
            assert!(Standing::ALL.iter().any(|&s| permits(s, a)), "{a:?}");
        }
        assert!(!permits(Standing::Driver, Action::SpamReport));
        assert!(permits(Standing::ApprovedProvider, Action::AddVehicle));
    }
}
