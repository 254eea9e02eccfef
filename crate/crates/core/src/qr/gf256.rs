//! Arithmetic in GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.

pub const PRIMITIVE: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE;
        }
        i += 1;
    }
    // second copy so exp[log a + log b] never needs a modulo
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

#[inline]
pub fn exp(power: usize) -> u8 {
    TABLES.exp[power % 255]
}

/// Discrete log base alpha. `a` must be non-zero.
#[inline]
pub fn log(a: u8) -> usize {
    debug_assert!(a != 0, "log of zero");
    TABLES.log[a as usize] as usize
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
    }
}

/// `a / b`; panics on division by zero.
#[inline]
pub fn div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + 255 - TABLES.log[b as usize] as usize]
    }
}

#[inline]
pub fn inv(a: u8) -> u8 {
    div(1, a)
}

/// alpha^power for a possibly negative exponent.
#[inline]
pub fn alpha_pow(power: i64) -> u8 {
    exp(power.rem_euclid(255) as usize)
}

/// Evaluate a polynomial given highest-degree coefficient first (Horner).
pub fn poly_eval_msb(poly: &[u8], x: u8) -> u8 {
    poly.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

/// Evaluate a polynomial given lowest-degree coefficient first.
pub fn poly_eval_lsb(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Shift-and-add multiplication, independent of the log tables.
    fn slow_mul(mut a: u8, mut b: u8) -> u8 {
        let mut p = 0u8;
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            let carry = a & 0x80 != 0;
            a <<= 1;
            if carry {
                a ^= (PRIMITIVE & 0xFF) as u8;
            }
            b >>= 1;
        }
        p
    }

    #[test]
    fn alpha_has_order_255() {
        assert_eq!(exp(255), 1);
        assert_eq!(alpha_pow(255), 1);
        for i in 1..255 {
            assert_ne!(exp(i), 1, "alpha^{i} == 1");
        }
    }

    #[test]
    fn exp_and_log_are_inverse() {
        for a in 1..=255u8 {
            assert_eq!(exp(log(a)), a);
        }
        for i in 0..255 {
            assert_eq!(log(exp(i)), i);
        }
    }

    #[test]
    fn table_mul_matches_shift_and_add() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), slow_mul(a, b));
            }
        }
    }

    #[test]
    fn field_axioms_on_samples() {
        let samples = [0u8, 1, 2, 3, 7, 29, 99, 128, 200, 255];
        for &a in &samples {
            for &b in &samples {
                assert_eq!(mul(a, b), mul(b, a));
                for &c in &samples {
                    assert_eq!(mul(mul(a, b), c), mul(a, mul(b, c)));
                    assert_eq!(mul(a, b ^ c), mul(a, b) ^ mul(a, c));
                }
            }
            if a != 0 {
                assert_eq!(mul(a, inv(a)), 1);
            }
        }
    }
}
