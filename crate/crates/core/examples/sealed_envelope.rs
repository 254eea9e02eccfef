//! Passphrase-sealed payloads and their QR form.

use fleetline_core::envelope::{open_bytes, seal_payload, OVERHEAD};
use fleetline_core::qr::EcLevel;
use fleetline_core::trip_qr::{make_trip_qr, open_trip_qr};

fn main() {
    let summary = br#"{"cost":"5000.000","tripId":"T000001"}"#;
    let sealed = seal_payload(summary, "correct horse").unwrap().to_bytes();
    println!("{} plaintext bytes sealed into {} ({OVERHEAD} overhead)", summary.len(), sealed.len());
    println!("opened: {}", String::from_utf8_lossy(&open_bytes(&sealed, "correct horse").unwrap()));
    println!("wrong passphrase: {}", open_bytes(&sealed, "battery staple").unwrap_err());

    let mut tampered = sealed.clone();
    tampered[sealed.len() - 1] ^= 1;
    println!("flipped tag bit: {}", open_bytes(&tampered, "correct horse").unwrap_err());

    let symbol = make_trip_qr(summary, "correct horse", EcLevel::Q).unwrap();
    println!("as QR: version {}", symbol.version());
    let back = open_trip_qr(&symbol, "correct horse").unwrap();
    assert_eq!(back, summary);
}
