pub mod dispatch;
pub mod envelope;
pub mod geo;
pub mod ids;
pub mod qr;
pub mod recommender;
pub mod reviews;
pub mod tracking;
pub mod trip_qr;
