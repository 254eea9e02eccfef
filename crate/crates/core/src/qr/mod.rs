//! Byte-mode QR Code symbols: Reed–Solomon over GF(256), symbol layout,
//! mask selection, and a decoder for clean module grids.

mod decode;
mod encode;
pub mod format;
pub mod gf256;
pub mod mask;
mod matrix;
pub mod reed_solomon;
pub mod tables;

pub use decode::{qr_decode, qr_decode_detailed, DecodeReport};
pub use encode::{qr_encode, qr_encode_with_mask, smallest_version};
pub use matrix::{codeword_layout, CodewordSlot, QrMatrix, QUIET_ZONE};
pub use reed_solomon::{rs_decode_correct, rs_generate_parity, syndromes};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QrError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("payload of {len} bytes exceeds capacity {capacity}")]
    Capacity { len: usize, capacity: usize },
    #[error("too many errors to correct")]
    Uncorrectable,
    #[error("format error: {0}")]
    Format(String),
    #[error("segment error: {0}")]
    Segment(String),
}

/// Error correction level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EcLevel {
    L,
    M,
    Q,
    H,
}

impl EcLevel {
    pub const ALL: [EcLevel; 4] = [EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H];

    pub(crate) fn ordinal(self) -> usize {
        self as usize
    }

    /// The two-bit code written into format information.
    pub fn format_bits(self) -> u32 {
        match self {
            EcLevel::L => 0b01,
            EcLevel::M => 0b00,
            EcLevel::Q => 0b11,
            EcLevel::H => 0b10,
        }
    }
}

impl std::str::FromStr for EcLevel {
    type Err = QrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L" => Ok(EcLevel::L),
            "M" => Ok(EcLevel::M),
            "Q" => Ok(EcLevel::Q),
            "H" => Ok(EcLevel::H),
            other => Err(QrError::InvalidParam(format!("unknown EC level {other:?}"))),
        }
    }
}
