//! The fleetline logistics service: accounts and roles, the event log, the
//! HTTP API, scenario seeding, reports and the end-to-end demo.

pub mod auth;
pub mod client;
pub mod clock;
pub mod config;
pub mod demo;
pub mod error;
pub mod events;
pub mod http;
pub mod local;
pub mod model;
pub mod report;
pub mod scenario;
pub mod service;
pub mod simulate;
pub mod state;

pub use error::ServiceError;
pub use service::{Service, ServiceOptions};
