//! Reed–Solomon over GF(256) with generator roots alpha^0 .. alpha^(nsym-1),
//! the convention used by QR symbols.
//!
//! Codewords are `data || parity` with the first byte as the highest-degree
//! coefficient. Decoding is Berlekamp–Massey, Chien search and Forney.

use super::gf256;
use super::QrError;

pub const MAX_NSYM: usize = 64;

/// Monic generator polynomial prod_{i<nsym} (x - alpha^i), highest degree first.
pub fn generator_poly(nsym: usize) -> Vec<u8> {
    let mut g = vec![1u8];
    for i in 0..nsym {
        let root = gf256::exp(i);
        let mut next = vec![0u8; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= gf256::mul(c, root);
        }
        g = next;
    }
    g
}

/// Remainder of `data * x^nsym` divided by the generator polynomial.
pub fn rs_generate_parity(data: &[u8], nsym: usize) -> Result<Vec<u8>, QrError> {
    if !(1..=MAX_NSYM).contains(&nsym) {
        return Err(QrError::InvalidParam(format!("nsym {nsym} outside 1..={MAX_NSYM}")));
    }
    if data.is_empty() {
        return Err(QrError::InvalidParam("empty data".into()));
    }
    Ok(remainder(data, &generator_poly(nsym)))
}

/// Polynomial division remainder against a monic divisor (highest degree first).
pub(crate) fn remainder(data: &[u8], generator: &[u8]) -> Vec<u8> {
    let nsym = generator.len() - 1;
    let mut rem = vec![0u8; nsym];
    for &byte in data {
        let factor = byte ^ rem[0];
        rem.rotate_left(1);
        rem[nsym - 1] = 0;
        for (r, &g) in rem.iter_mut().zip(&generator[1..]) {
            *r ^= gf256::mul(g, factor);
        }
    }
    rem
}

/// S_j = C(alpha^j) for j in 0..nsym.
pub fn syndromes(codeword: &[u8], nsym: usize) -> Vec<u8> {
    (0..nsym)
        .map(|j| gf256::poly_eval_msb(codeword, gf256::exp(j)))
        .collect()
}

/// Correct up to floor(nsym/2) byte errors and return the data part.
pub fn rs_decode_correct(codeword: &[u8], nsym: usize) -> Result<Vec<u8>, QrError> {
    let mut fixed = codeword.to_vec();
    rs_correct_in_place(&mut fixed, nsym)?;
    fixed.truncate(codeword.len() - nsym);
    Ok(fixed)
}

/// Correct a full codeword in place; returns the number of corrected bytes.
pub fn rs_correct_in_place(codeword: &mut [u8], nsym: usize) -> Result<usize, QrError> {
    if !(1..=MAX_NSYM).contains(&nsym) {
        return Err(QrError::InvalidParam(format!("nsym {nsym} outside 1..={MAX_NSYM}")));
    }
    let n = codeword.len();
    if n <= nsym || n > 255 {
        return Err(QrError::InvalidParam(format!(
            "codeword length {n} must be in {}..=255",
            nsym + 1
        )));
    }

    let synd = syndromes(codeword, nsym);
    if synd.iter().all(|&s| s == 0) {
        return Ok(0);
    }

    let locator = berlekamp_massey(&synd);
    let errors = locator.len() - 1;
    if errors == 0 || 2 * errors > nsym {
        return Err(QrError::Uncorrectable);
    }

    // Chien search: position p (0 = first byte) has locator X = alpha^(n-1-p)
    let positions: Vec<usize> = (0..n)
        .filter(|&p| {
            let x_inv = gf256::alpha_pow(-((n - 1 - p) as i64));
            gf256::poly_eval_lsb(&locator, x_inv) == 0
        })
        .collect();
    if positions.len() != errors {
        return Err(QrError::Uncorrectable);
    }

    // Omega(x) = S(x) * Lambda(x) mod x^nsym, lowest degree first
    let mut omega = vec![0u8; nsym];
    for (i, &s) in synd.iter().enumerate() {
        for (j, &l) in locator.iter().enumerate() {
            if i + j < nsym {
                omega[i + j] ^= gf256::mul(s, l);
            }
        }
    }
    // formal derivative: odd-power terms survive in characteristic 2
    let deriv: Vec<u8> = locator
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
        .collect();

    for &p in &positions {
        let power = (n - 1 - p) as i64;
        let x = gf256::alpha_pow(power);
        let x_inv = gf256::alpha_pow(-power);
        let denom = gf256::poly_eval_lsb(&deriv, x_inv);
        if denom == 0 {
            return Err(QrError::Uncorrectable);
        }
        let magnitude = gf256::mul(x, gf256::div(gf256::poly_eval_lsb(&omega, x_inv), denom));
        codeword[p] ^= magnitude;
    }

    if syndromes(codeword, nsym).iter().any(|&s| s != 0) {
        return Err(QrError::Uncorrectable);
    }
    Ok(errors)
}

/// Error locator polynomial, lowest degree first, trimmed to its degree.
fn berlekamp_massey(synd: &[u8]) -> Vec<u8> {
    let mut current = vec![1u8];
    let mut previous = vec![1u8];
    let mut degree = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u8;

    for step in 0..synd.len() {
        let mut disc = synd[step];
        for i in 1..=degree.min(current.len() - 1) {
            disc ^= gf256::mul(current[i], synd[step - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = gf256::div(disc, prev_disc);
        let mut updated = current.clone();
        if updated.len() < previous.len() + shift {
            updated.resize(previous.len() + shift, 0);
        }
        for (i, &b) in previous.iter().enumerate() {
            updated[i + shift] ^= gf256::mul(coef, b);
        }
        if 2 * degree <= step {
            degree = step + 1 - degree;
            previous = std::mem::replace(&mut current, updated);
            prev_disc = disc;
            shift = 1;
        } else {
            current = updated;
            shift += 1;
        }
    }
    current.truncate(degree + 1);
    current.resize(degree + 1, 0);
    current
}
