//! Records owned by the service on top of the core dispatch types.

use fleetline_core::dispatch::{Money, Trip};
use fleetline_core::envelope::{derive_key, KEY_LEN};
use fleetline_core::ids::{
    AccountId, CustomerId, DriverId, NotificationId, PaymentId, ProviderId, ReviewId, TripId,
};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use subtle::ConstantTimeEq;

pub const PASSWORD_SALT_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Admin,
    Provider,
    Customer,
    Driver,
}

/// Salted PBKDF2 digest, both parts hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasswordHash {
    pub salt: String,
    pub hash: String,
}

impl PasswordHash {
    pub fn new(password: &str) -> Self {
        let mut salt = [0u8; PASSWORD_SALT_LEN];
        rand::rng().fill_bytes(&mut salt);
        Self::with_salt(password, &salt)
    }

    pub fn with_salt(password: &str, salt: &[u8]) -> Self {
        Self {
            salt: hex::encode(salt),
            hash: hex::encode(derive_key(password, salt)),
        }
    }

    /// Constant-time comparison of the derived key.
    pub fn verify(&self, password: &str) -> bool {
        let (Ok(salt), Ok(want)) = (hex::decode(&self.salt), hex::decode(&self.hash)) else {
            return false;
        };
        if want.len() != KEY_LEN {
            return false;
        }
        derive_key(password, &salt).ct_eq(&want).into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Account {
    pub account_id: AccountId,
    pub login: String,
    pub role: Role,
    pub password: PasswordHash,
    /// The provider, customer or driver id this account acts as; empty for the admin.
    pub subject: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApprovalStatus {
    Pending,
    Approved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provider {
    pub provider_id: ProviderId,
    pub account_id: AccountId,
    pub name: String,
    pub status: ApprovalStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Customer {
    pub customer_id: CustomerId,
    pub account_id: AccountId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaymentStatus {
    Recorded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PaymentRecord {
    pub payment_id: PaymentId,
    pub trip_id: TripId,
    pub customer_id: CustomerId,
    pub provider_id: ProviderId,
    pub amount: Money,
    pub status: PaymentStatus,
    pub recorded_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Notification {
    pub notification_id: NotificationId,
    pub provider_id: ProviderId,
    pub driver_id: DriverId,
    pub trip_id: Option<TripId>,
    pub message: String,
    pub sent_at: u64,
}

/// A trip plus the service-side bookkeeping around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TripRecord {
    pub trip: Trip,
    pub allocated_at: u64,
    pub started_at: Option<u64>,
    pub completed_at: Option<u64>,
    pub cancelled_at: Option<u64>,
    pub payment_id: Option<PaymentId>,
    pub review_id: Option<ReviewId>,
}
