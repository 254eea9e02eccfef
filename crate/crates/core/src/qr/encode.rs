use super::format::{
    format_bits, format_positions_primary, format_positions_secondary, version_bits,
    version_positions,
};
use super::mask::{mask_bit, penalty_score};
use super::matrix::{data_module_order, draw_fixed_patterns, function_mask, QrMatrix};
use super::reed_solomon::{generator_poly, remainder};
use super::{tables, EcLevel, QrError};

const MODE_BYTE: u32 = 0b0100;

/// Encode `payload` as a byte-mode symbol of exactly `version`, picking the
/// mask with the lowest penalty (ties go to the lower mask number).
pub fn qr_encode(payload: &[u8], version: u8, ec: EcLevel) -> Result<QrMatrix, QrError> {
    let codewords = build_codewords(payload, version, ec)?;
    let base = place_codewords(&codewords, version);
    let func = function_mask(version);

    let mut best: Option<(u32, QrMatrix)> = None;
    for mask in 0..8u8 {
        let candidate = finish(&base, &func, ec, mask);
        let score = penalty_score(&candidate);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.expect("eight masks evaluated").1)
}

/// Encode with a caller-chosen mask.
pub fn qr_encode_with_mask(
    payload: &[u8],
    version: u8,
    ec: EcLevel,
    mask: u8,
) -> Result<QrMatrix, QrError> {
    if mask > 7 {
        return Err(QrError::InvalidParam(format!("mask {mask} outside 0..=7")));
    }
    let codewords = build_codewords(payload, version, ec)?;
    let base = place_codewords(&codewords, version);
    Ok(finish(&base, &function_mask(version), ec, mask))
}

/// Smallest version in `min..=max` whose byte capacity holds `len` bytes.
pub fn smallest_version(len: usize, ec: EcLevel, max: u8) -> Option<u8> {
    (tables::MIN_VERSION..=max.min(tables::MAX_VERSION)).find(|&v| tables::byte_capacity(v, ec) >= len)
}

pub(crate) fn check_version(version: u8) -> Result<(), QrError> {
    if (tables::MIN_VERSION..=tables::MAX_VERSION).contains(&version) {
        Ok(())
    } else {
        Err(QrError::InvalidParam(format!(
            "version {version} outside {}..={}",
            tables::MIN_VERSION,
            tables::MAX_VERSION
        )))
    }
}

/// Data segment, padding, per-block parity and interleaving.
pub(crate) fn build_codewords(payload: &[u8], version: u8, ec: EcLevel) -> Result<Vec<u8>, QrError> {
    check_version(version)?;
    let capacity = tables::byte_capacity(version, ec);
    if payload.len() > capacity {
        return Err(QrError::Capacity {
            len: payload.len(),
            capacity,
        });
    }
    let data_len = tables::data_codewords(version, ec);
    let capacity_bits = data_len * 8;

    let mut bits = BitBuffer::default();
    bits.push(MODE_BYTE, 4);
    bits.push(payload.len() as u32, tables::char_count_bits(version));
    for &b in payload {
        bits.push(b as u32, 8);
    }
    let terminator = (capacity_bits - bits.len()).min(4);
    bits.push(0, terminator);
    let to_byte = (8 - bits.len() % 8) % 8;
    bits.push(0, to_byte);

    let mut data = bits.into_bytes();
    for pad in [0xEC, 0x11].into_iter().cycle() {
        if data.len() >= data_len {
            break;
        }
        data.push(pad);
    }

    let ecc_len = tables::ecc_per_block(version, ec);
    let generator = generator_poly(ecc_len);
    let mut blocks: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    let mut offset = 0;
    for len in tables::block_data_lengths(version, ec) {
        let chunk = data[offset..offset + len].to_vec();
        offset += len;
        let parity = remainder(&chunk, &generator);
        blocks.push((chunk, parity));
    }

    let longest = blocks.iter().map(|(d, _)| d.len()).max().unwrap_or(0);
    let mut out = Vec::with_capacity(tables::total_codewords(version));
    for i in 0..longest {
        out.extend(blocks.iter().filter_map(|(d, _)| d.get(i)));
    }
    for i in 0..ecc_len {
        out.extend(blocks.iter().map(|(_, p)| p[i]));
    }
    Ok(out)
}

/// Unmasked symbol: fixed patterns plus codeword bits. Remainder bits stay light.
fn place_codewords(codewords: &[u8], version: u8) -> QrMatrix {
    let mut m = QrMatrix::blank(version);
    draw_fixed_patterns(&mut m);
    let side = m.side();
    if version >= 7 {
        let bits = version_bits(version);
        for i in 0..18 {
            for (x, y) in version_positions(side, i) {
                m.set(x, y, (bits >> i) & 1 == 1);
            }
        }
    }
    let total_bits = codewords.len() * 8;
    for (i, (x, y)) in data_module_order(version).into_iter().enumerate() {
        if i >= total_bits {
            break;
        }
        let bit = (codewords[i / 8] >> (7 - i % 8)) & 1 == 1;
        m.set(x, y, bit);
    }
    m
}

fn finish(base: &QrMatrix, func: &[bool], ec: EcLevel, mask: u8) -> QrMatrix {
    let mut m = base.clone();
    let side = m.side();
    for y in 0..side {
        for x in 0..side {
            if !func[y * side + x] && mask_bit(mask, x, y) {
                m.flip(x, y);
            }
        }
    }
    let bits = format_bits(ec, mask);
    for (i, (x, y)) in format_positions_primary().into_iter().enumerate() {
        m.set(x, y, (bits >> i) & 1 == 1);
    }
    for (i, (x, y)) in format_positions_secondary(side).into_iter().enumerate() {
        m.set(x, y, (bits >> i) & 1 == 1);
    }
    m.set(8, side - 8, true);
    m
}

#[derive(Default)]
struct BitBuffer {
    bits: Vec<bool>,
}

impl BitBuffer {
    fn push(&mut self, value: u32, width: usize) {
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    fn len(&self) -> usize {
        self.bits.len()
    }

    fn into_bytes(self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighteen_bytes_overflow_version_one_low() {
        assert!(matches!(
            qr_encode(&[b'x'; 18], 1, EcLevel::L),
            Err(QrError::Capacity { len: 18, capacity: 17 })
        ));
        assert!(qr_encode(&[b'x'; 17], 1, EcLevel::L).is_ok());
    }

    #[test]
    fn rejects_bad_version() {
        assert!(matches!(qr_encode(b"a", 0, EcLevel::L), Err(QrError::InvalidParam(_))));
        assert!(matches!(qr_encode(b"a", 41, EcLevel::L), Err(QrError::InvalidParam(_))));
    }

    #[test]
    fn codeword_stream_for_ab() {
        // 0100 | 00000010 | 01000001 | 01000010 | 0000, then pad bytes
        let cw = build_codewords(b"AB", 1, EcLevel::L).unwrap();
        assert_eq!(cw.len(), 26);
        assert_eq!(&cw[..5], &[0x40, 0x24, 0x14, 0x20, 0xEC]);
        assert_eq!(&cw[5..19], &[0x11, 0xEC, 0x11, 0xEC, 0x11, 0xEC, 0x11, 0xEC, 0x11, 0xEC, 0x11, 0xEC, 0x11, 0xEC]);
    }

    #[test]
    fn smallest_version_lookup() {
        assert_eq!(smallest_version(17, EcLevel::L, 40), Some(1));
        assert_eq!(smallest_version(18, EcLevel::L, 40), Some(2));
        assert_eq!(smallest_version(79, EcLevel::L, 4), None);
    }
}
