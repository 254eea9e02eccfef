use super::format::{
    decode_format, decode_version, format_positions_primary, format_positions_secondary,
    version_positions,
};
use super::mask::mask_bit;
use super::matrix::{data_module_order, has_finders, QrMatrix};
use super::reed_solomon::rs_correct_in_place;
use super::{tables, EcLevel, QrError};

/// What the decoder learned besides the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub payload: Vec<u8>,
    pub version: u8,
    pub ec: EcLevel,
    pub mask: u8,
    pub corrected_bytes: usize,
}

pub fn qr_decode(matrix: &QrMatrix) -> Result<Vec<u8>, QrError> {
    qr_decode_detailed(matrix).map(|r| r.payload)
}

pub fn qr_decode_detailed(matrix: &QrMatrix) -> Result<DecodeReport, QrError> {
    let version = matrix.version();
    let side = matrix.side();
    if !has_finders(matrix) || !matrix.get(8, side - 8) {
        return Err(QrError::Format("finder patterns or dark module missing".into()));
    }
    let (ec, mask) = read_format(matrix)?;
    if version >= 7 {
        check_version_info(matrix)?;
    }

    let total = tables::total_codewords(version);
    let mut raw = vec![0u8; total];
    for (i, (x, y)) in data_module_order(version).into_iter().enumerate() {
        if i >= total * 8 {
            break;
        }
        let bit = matrix.get(x, y) ^ mask_bit(mask, x, y);
        if bit {
            raw[i / 8] |= 1 << (7 - i % 8);
        }
    }

    // de-interleave: data bytes round-robin (short blocks drop out last), then parity
    let lens = tables::block_data_lengths(version, ec);
    let ecc_len = tables::ecc_per_block(version, ec);
    let mut blocks: Vec<Vec<u8>> = lens.iter().map(|&l| Vec::with_capacity(l + ecc_len)).collect();
    let longest = lens.iter().copied().max().unwrap_or(0);
    let mut it = raw.into_iter();
    for i in 0..longest {
        for (b, &len) in blocks.iter_mut().zip(&lens) {
            if i < len {
                b.push(it.next().ok_or(QrError::Uncorrectable)?);
            }
        }
    }
    for _ in 0..ecc_len {
        for b in blocks.iter_mut() {
            b.push(it.next().ok_or(QrError::Uncorrectable)?);
        }
    }

    let mut data = Vec::with_capacity(lens.iter().sum());
    let mut corrected = 0;
    for (mut block, &len) in blocks.into_iter().zip(&lens) {
        corrected += rs_correct_in_place(&mut block, ecc_len)?;
        data.extend_from_slice(&block[..len]);
    }

    let payload = parse_byte_segment(&data, version)?;
    Ok(DecodeReport {
        payload,
        version,
        ec,
        mask,
        corrected_bytes: corrected,
    })
}

fn read_format(m: &QrMatrix) -> Result<(EcLevel, u8), QrError> {
    let read = |positions: [(usize, usize); 15]| {
        positions
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &(x, y))| acc | ((m.get(x, y) as u32) << i))
    };
    let primary = decode_format(read(format_positions_primary()));
    let secondary = decode_format(read(format_positions_secondary(m.side())));
    let best = match (primary, secondary) {
        (Some(a), Some(b)) => Some(if b.2 < a.2 { b } else { a }),
        (a, b) => a.or(b),
    };
    best.map(|(ec, mask, _)| (ec, mask))
        .ok_or_else(|| QrError::Format("no readable format information".into()))
}

fn check_version_info(m: &QrMatrix) -> Result<(), QrError> {
    let side = m.side();
    let copies: Vec<u32> = (0..2)
        .map(|copy| {
            (0..18).fold(0u32, |acc, i| {
                let (x, y) = version_positions(side, i)[copy];
                acc | ((m.get(x, y) as u32) << i)
            })
        })
        .collect();
    let expected = m.version();
    if copies.iter().any(|&raw| decode_version(raw) == Some(expected)) {
        Ok(())
    } else {
        Err(QrError::Format(format!(
            "version information does not match a {side}x{side} symbol"
        )))
    }
}

fn parse_byte_segment(data: &[u8], version: u8) -> Result<Vec<u8>, QrError> {
    let mut reader = BitReader { data, pos: 0 };
    let mode = reader
        .read(4)
        .ok_or_else(|| QrError::Segment("truncated mode indicator".into()))?;
    if mode != 0b0100 {
        return Err(QrError::Segment(format!("unsupported mode {mode:04b}")));
    }
    let count = reader
        .read(tables::char_count_bits(version))
        .ok_or_else(|| QrError::Segment("truncated character count".into()))? as usize;
    (0..count)
        .map(|_| reader.read(8).map(|b| b as u8))
        .collect::<Option<Vec<u8>>>()
        .ok_or_else(|| QrError::Segment(format!("count {count} exceeds segment data")))
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn read(&mut self, width: usize) -> Option<u32> {
        if self.pos + width > self.data.len() * 8 {
            return None;
        }
        let mut v = 0u32;
        for _ in 0..width {
            let bit = (self.data[self.pos / 8] >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u32;
            self.pos += 1;
        }
        Some(v)
    }
}
