//! Seal a serialized trip summary and carry it in a QR symbol.

use thiserror::Error;

use crate::envelope::{self, EnvelopeError};
use crate::qr::{self, tables, EcLevel, QrError, QrMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripQrError {
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Qr(#[from] QrError),
}

/// Seal `summary` and encode the envelope bytes at the smallest version that
/// holds them at level `ec`.
pub fn make_trip_qr(summary: &[u8], passphrase: &str, ec: EcLevel) -> Result<QrMatrix, TripQrError> {
    let sealed = envelope::seal_payload(summary, passphrase)?.to_bytes();
    let version = qr::smallest_version(sealed.len(), ec, tables::MAX_VERSION).ok_or(
        QrError::Capacity {
            len: sealed.len(),
            capacity: tables::byte_capacity(tables::MAX_VERSION, ec),
        },
    )?;
    Ok(qr::qr_encode(&sealed, version, ec)?)
}

/// Decode the symbol and open the envelope inside it.
pub fn open_trip_qr(matrix: &QrMatrix, passphrase: &str) -> Result<Vec<u8>, TripQrError> {
    let bytes = qr::qr_decode(matrix)?;
    Ok(envelope::open_bytes(&bytes, passphrase)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_wrong_passphrase() {
        let summary = br#"{"cost":"5000.000","tripId":"T000001"}"#;
        let m = make_trip_qr(summary, "pass", EcLevel::M).unwrap();
        assert_eq!(open_trip_qr(&m, "pass").unwrap(), summary);
        assert_eq!(
            open_trip_qr(&m, "nope"),
            Err(TripQrError::Envelope(EnvelopeError::AuthFailure))
        );
    }

    #[test]
    fn picks_smallest_fitting_version() {
        for len in [0usize, 10, 29, 30, 60, 200] {
            let summary = vec![b'a'; len];
            let m = make_trip_qr(&summary, "pw", EcLevel::L).unwrap();
            let need = len + envelope::OVERHEAD;
            let expected = (1..=40u8)
                .find(|&v| tables::byte_capacity(v, EcLevel::L) >= need)
                .unwrap();
            assert_eq!(m.version(), expected, "len {len}");
        }
    }

    #[test]
    fn too_large_is_capacity_error() {
        let huge = vec![0u8; 3000];
        assert!(matches!(
            make_trip_qr(&huge, "pw", EcLevel::L),
            Err(TripQrError::Qr(QrError::Capacity { .. }))
        ));
    }
}
