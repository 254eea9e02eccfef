//! Module grid, fixed function patterns and PBM import/export.

use super::{tables, EcLevel, QrError};

pub const QUIET_ZONE: usize = 4;

/// A square grid of modules; `true` is dark.
#[derive(Clone, PartialEq, Eq)]
pub struct QrMatrix {
    version: u8,
    side: usize,
    cells: Vec<bool>,
}

impl std::fmt::Debug for QrMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QrMatrix v{} ({}x{})", self.version, self.side, self.side)?;
        for y in 0..self.side {
            let row: String = (0..self.side)
                .map(|x| if self.get(x, y) { '#' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl QrMatrix {
    pub(crate) fn blank(version: u8) -> Self {
        let side = tables::side(version);
        Self {
            version,
            side,
            cells: vec![false; side * side],
        }
    }

    /// Wrap a row-major grid. The side length must be a valid QR size.
    pub fn from_cells(side: usize, cells: Vec<bool>) -> Result<Self, QrError> {
        let version = tables::version_for_side(side)
            .ok_or_else(|| QrError::Format(format!("{side} is not a QR symbol size")))?;
        if cells.len() != side * side {
            return Err(QrError::Format(format!(
                "expected {} cells, got {}",
                side * side,
                cells.len()
            )));
        }
        Ok(Self {
            version,
            side,
            cells,
        })
    }

    pub fn version(&self) -> u8 {
        self.version
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Module at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.side + x]
    }

    pub fn set(&mut self, x: usize, y: usize, dark: bool) {
        self.cells[y * self.side + x] = dark;
    }

    pub fn flip(&mut self, x: usize, y: usize) {
        let i = y * self.side + x;
        self.cells[i] = !self.cells[i];
    }

    pub fn dark_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Plain PBM (P1), one character per module, with a light quiet zone.
    pub fn to_pbm(&self) -> String {
        let full = self.side + 2 * QUIET_ZONE;
        let mut out = String::with_capacity(full * (full + 1) + 16);
        out.push_str(&format!("P1\n{full} {full}\n"));
        for y in 0..full {
            for x in 0..full {
                let inside = (QUIET_ZONE..QUIET_ZONE + self.side).contains(&x)
                    && (QUIET_ZONE..QUIET_ZONE + self.side).contains(&y);
                let dark = inside && self.get(x - QUIET_ZONE, y - QUIET_ZONE);
                out.push(if dark { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parse a P1 bitmap. The symbol is located by the bounding box of its
    /// dark modules, so any light border width is accepted.
    pub fn from_pbm(text: &str) -> Result<Self, QrError> {
        let bad = |m: &str| QrError::Format(format!("pbm: {m}"));
        let mut tokens = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace());
        }
        let mut it = tokens.into_iter();
        if it.next() != Some("P1") {
            return Err(bad("missing P1 magic"));
        }
        let width: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("width"))?;
        let height: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("height"))?;
        let mut pixels = Vec::with_capacity(width * height);
        for tok in it {
            for ch in tok.chars() {
                match ch {
                    '0' => pixels.push(false),
                    '1' => pixels.push(true),
                    _ => return Err(bad("raster must be 0/1")),
                }
            }
        }
        if pixels.len() != width * height {
            return Err(bad("raster size does not match header"));
        }

        let dark = |x: usize, y: usize| pixels[y * width + x];
        let rows: Vec<usize> = (0..height).filter(|&y| (0..width).any(|x| dark(x, y))).collect();
        let cols: Vec<usize> = (0..width).filter(|&x| (0..height).any(|y| dark(x, y))).collect();
        let (Some(&top), Some(&bottom), Some(&left), Some(&right)) =
            (rows.first(), rows.last(), cols.first(), cols.last())
        else {
            return Err(QrError::Format("no dark modules".into()));
        };
        let side = bottom - top + 1;
        if right - left + 1 != side {
            return Err(QrError::Format("symbol is not square".into()));
        }
        let cells = (0..side * side)
            .map(|i| dark(left + i % side, top + i / side))
            .collect();
        Self::from_cells(side, cells)
    }
}

/// Which modules belong to fixed patterns (finder, timing, alignment,
/// format and version areas, dark module).
pub(crate) fn function_mask(version: u8) -> Vec<bool> {
    let side = tables::side(version);
    let mut mask = vec![false; side * side];
    let mut mark = |x: usize, y: usize| mask[y * side + x] = true;

    // finders + separators + format areas
    for y in 0..9 {
        for x in 0..9 {
            mark(x, y);
        }
    }
    for y in 0..9 {
        for x in side - 8..side {
            mark(x, y);
        }
    }
    for y in side - 8..side {
        for x in 0..9 {
            mark(x, y);
        }
    }
    for i in 0..side {
        mark(i, 6);
        mark(6, i);
    }
    for (cx, cy) in alignment_centres(version) {
        for y in cy - 2..=cy + 2 {
            for x in cx - 2..=cx + 2 {
                mark(x, y);
            }
        }
    }
    if version >= 7 {
        for a in side - 11..side - 8 {
            for b in 0..6 {
                mark(a, b);
                mark(b, a);
            }
        }
    }
    mask
}

pub(crate) fn alignment_centres(version: u8) -> Vec<(usize, usize)> {
    let pos = tables::alignment_positions(version);
    let n = pos.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // skip the three corners occupied by finders
            if (i == 0 && j == 0) || (i == 0 && j == n - 1) || (i == n - 1 && j == 0) {
                continue;
            }
            out.push((pos[i], pos[j]));
        }
    }
    out
}

/// Draw finders, separators, timing and alignment patterns.
pub(crate) fn draw_fixed_patterns(m: &mut QrMatrix) {
    let side = m.side;
    for (cx, cy) in [(3, 3), (side - 4, 3), (3, side - 4)] {
        for dy in -4i64..=4 {
            for dx in -4i64..=4 {
                let (x, y) = (cx as i64 + dx, cy as i64 + dy);
                if x < 0 || y < 0 || x >= side as i64 || y >= side as i64 {
                    continue;
                }
                let ring = dx.abs().max(dy.abs());
                m.set(x as usize, y as usize, ring != 2 && ring != 4);
            }
        }
    }
    for i in 8..side - 8 {
        m.set(i, 6, i % 2 == 0);
        m.set(6, i, i % 2 == 0);
    }
    for (cx, cy) in alignment_centres(m.version) {
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let ring = dx.abs().max(dy.abs());
                m.set((cx as i64 + dx) as usize, (cy as i64 + dy) as usize, ring != 1);
            }
        }
    }
}

/// True when the three finder patterns are intact.
pub(crate) fn has_finders(m: &QrMatrix) -> bool {
    let side = m.side;
    [(3usize, 3usize), (side - 4, 3), (3, side - 4)]
        .iter()
        .all(|&(cx, cy)| {
            (-3i64..=3).all(|dy| {
                (-3i64..=3).all(|dx| {
                    let ring = dx.abs().max(dy.abs());
                    m.get((cx as i64 + dx) as usize, (cy as i64 + dy) as usize) == (ring != 2)
                })
            })
        })
}

/// Module visiting order for codeword bits: two-column zig-zag from the
/// bottom-right, skipping the vertical timing column and function modules.
pub(crate) fn data_module_order(version: u8) -> Vec<(usize, usize)> {
    let side = tables::side(version);
    let func = function_mask(version);
    let mut order = Vec::with_capacity(tables::raw_data_modules(version));
    let mut right = side as i64 - 1;
    while right >= 1 {
        if right == 6 {
            right = 5;
        }
        let upward = ((right + 1) & 2) == 0;
        for vert in 0..side {
            let y = if upward { side - 1 - vert } else { vert };
            for j in 0..2 {
                let x = (right - j) as usize;
                if !func[y * side + x] {
                    order.push((x, y));
                }
            }
        }
        right -= 2;
    }
    order
}

/// Where one codeword of a symbol lives: its error-correction block and the
/// eight modules holding its bits, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordSlot {
    pub block: usize,
    pub modules: [(usize, usize); 8],
}

/// Slots for every codeword in transmission (interleaved) order.
pub fn codeword_layout(version: u8, ec: EcLevel) -> Vec<CodewordSlot> {
    let lens = tables::block_data_lengths(version, ec);
    let longest = lens.iter().copied().max().unwrap_or(0);
    let mut blocks = Vec::new();
    for i in 0..longest {
        blocks.extend((0..lens.len()).filter(|&b| i < lens[b]));
    }
    for _ in 0..tables::ecc_per_block(version, ec) {
        blocks.extend(0..lens.len());
    }
    let order = data_module_order(version);
    blocks
        .into_iter()
        .enumerate()
        .map(|(i, block)| CodewordSlot {
            block,
            modules: std::array::from_fn(|bit| order[i * 8 + bit]),
        })
        .collect()
}
