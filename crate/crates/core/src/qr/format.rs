//! Format information (EC level + mask, BCH(15,5)) and version information
//! (BCH(18,6)), including where each copy sits in the symbol.

use super::EcLevel;

const FORMAT_GENERATOR: u32 = 0x537;
const FORMAT_XOR_MASK: u32 = 0x5412;
const VERSION_GENERATOR: u32 = 0x1F25;

/// 15-bit masked format word for (ec, mask).
pub fn format_bits(ec: EcLevel, mask: u8) -> u32 {
    let data = (ec.format_bits() << 3) | mask as u32;
    let mut rem = data;
    for _ in 0..10 {
        rem = (rem << 1) ^ ((rem >> 9) * FORMAT_GENERATOR);
    }
    ((data << 10) | rem) ^ FORMAT_XOR_MASK
}

/// 18-bit version word; only meaningful for versions 7 and up.
pub fn version_bits(version: u8) -> u32 {
    let data = version as u32;
    let mut rem = data;
    for _ in 0..12 {
        rem = (rem << 1) ^ ((rem >> 11) * VERSION_GENERATOR);
    }
    (data << 12) | rem
}

/// Nearest valid format word within Hamming distance 3.
pub fn decode_format(raw: u32) -> Option<(EcLevel, u8, u32)> {
    EcLevel::ALL
        .into_iter()
        .flat_map(|ec| (0..8u8).map(move |m| (ec, m)))
        .map(|(ec, m)| (ec, m, (format_bits(ec, m) ^ raw).count_ones()))
        .min_by_key(|&(_, _, d)| d)
        .filter(|&(_, _, d)| d <= 3)
}

/// Nearest valid version word within Hamming distance 3.
pub fn decode_version(raw: u32) -> Option<u8> {
    (7..=40u8)
        .map(|v| (v, (version_bits(v) ^ raw).count_ones()))
        .min_by_key(|&(_, d)| d)
        .filter(|&(_, d)| d <= 3)
        .map(|(v, _)| v)
}

/// (x, y) of format bit i (0 = least significant) in the copy around the
/// top-left finder.
pub fn format_positions_primary() -> [(usize, usize); 15] {
    let mut out = [(0, 0); 15];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = match i {
            0..=5 => (8, i),
            6 => (8, 7),
            7 => (8, 8),
            8 => (7, 8),
            _ => (14 - i, 8),
        };
    }
    out
}

/// (x, y) of format bit i in the copy split between the other two finders.
pub fn format_positions_secondary(side: usize) -> [(usize, usize); 15] {
    let mut out = [(0, 0); 15];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = if i < 8 {
            (side - 1 - i, 8)
        } else {
            (8, side - 15 + i)
        };
    }
    out
}

/// Both copies of version bit i: bottom-left block then top-right block.
pub fn version_positions(side: usize, i: usize) -> [(usize, usize); 2] {
    let a = side - 11 + i % 3;
    let b = i / 3;
    [(b, a), (a, b)]
}
