//! The eight data masks and the standard penalty score used to pick one.

use super::matrix::QrMatrix;

const N1: u32 = 3;
const N2: u32 = 3;
const N3: u32 = 40;
const N4: u32 = 10;

/// Whether mask `pattern` inverts the module at column `x`, row `y`.
#[allow(clippy::manual_is_multiple_of)]
pub fn mask_bit(pattern: u8, x: usize, y: usize) -> bool {
    match pattern {
        0 => (x + y) % 2 == 0,
        1 => y % 2 == 0,
        2 => x % 3 == 0,
        3 => (x + y) % 3 == 0,
        4 => (x / 3 + y / 2) % 2 == 0,
        5 => (x * y) % 2 + (x * y) % 3 == 0,
        6 => ((x * y) % 2 + (x * y) % 3) % 2 == 0,
        7 => ((x + y) % 2 + (x * y) % 3) % 2 == 0,
        _ => unreachable!("mask pattern {pattern} out of range"),
    }
}

/// Sum of the four penalty rules: runs of five or more, 2x2 blocks,
/// finder-like 1:1:3:1:1 sequences with four light modules on one side,
/// and dark/light imbalance.
pub fn penalty_score(m: &QrMatrix) -> u32 {
    let side = m.side();
    let mut score = 0;

    let rows = (0..side).map(|y| (0..side).map(|x| m.get(x, y)).collect::<Vec<_>>());
    let cols = (0..side).map(|x| (0..side).map(|y| m.get(x, y)).collect::<Vec<_>>());
    for line in rows.chain(cols) {
        score += run_penalty(&line) + finder_penalty(&line);
    }

    for y in 0..side - 1 {
        for x in 0..side - 1 {
            let c = m.get(x, y);
            if c == m.get(x + 1, y) && c == m.get(x, y + 1) && c == m.get(x + 1, y + 1) {
                score += N2;
            }
        }
    }

    let total = side * side;
    let dark = m.dark_count();
    // smallest k with (45 - 5k)% <= dark ratio <= (55 + 5k)%
    let deviation = (dark * 20).abs_diff(total * 10);
    let k = deviation.div_ceil(total).saturating_sub(1);
    score + k as u32 * N4
}

fn run_penalty(line: &[bool]) -> u32 {
    let mut score = 0;
    let mut run = 0;
    let mut colour = None;
    for &c in line {
        if Some(c) == colour {
            run += 1;
        } else {
            colour = Some(c);
            run = 1;
        }
        if run == 5 {
            score += N1;
        } else if run > 5 {
            score += 1;
        }
    }
    score
}

fn finder_penalty(line: &[bool]) -> u32 {
    const CORE: [bool; 7] = [true, false, true, true, true, false, true];
    let n = line.len() as i64;
    // outside the symbol counts as light (quiet zone)
    let at = |i: i64| i >= 0 && i < n && line[i as usize];
    let mut score = 0;
    for start in 0..=(n - 7) {
        if !(0..7).all(|k| at(start + k) == CORE[k as usize]) {
            continue;
        }
        let light_before = (1..=4).all(|k| !at(start - k));
        let light_after = (7..11).all(|k| !at(start + k));
        if light_before || light_after {
            score += N3;
        }
    }
    score
}
