//! Fixed-point quantities used for pricing.
//!
//! Distances are held in metres (three decimals of a kilometre) and money in
//! thousandths of a minor currency unit, so `cost = distance x rate` is an
//! exact integer product. All values serialize as decimal strings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Minor units per major unit (cents per dollar, say).
pub const MINOR_PER_MAJOR: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("{0} must not be negative")]
    Negative(&'static str),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error("{0} overflows")]
    Overflow(&'static str),
    #[error("cannot parse {0:?} as a fixed-point decimal")]
    Parse(String),
}

/// Route distance, stored in metres.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Km(u64);

impl Km {
    pub const ZERO: Km = Km(0);

    pub fn from_metres(m: u64) -> Self {
        Self(m)
    }

    /// Rounds to the nearest metre.
    pub fn from_km(km: f64) -> Result<Self, UnitError> {
        if !km.is_finite() {
            return Err(UnitError::NotFinite("distance"));
        }
        if km < 0.0 {
            return Err(UnitError::Negative("distance"));
        }
        let m = (km * 1000.0).round();
        if m >= u64::MAX as f64 {
            return Err(UnitError::Overflow("distance"));
        }
        Ok(Self(m as u64))
    }

    pub fn metres(self) -> u64 {
        self.0
    }

    pub fn as_km(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn checked_add(self, other: Km) -> Option<Km> {
        self.0.checked_add(other.0).map(Km)
    }
}

/// Price per kilometre in whole minor units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct RatePerKm(u64);

impl RatePerKm {
    pub fn new(minor_per_km: u64) -> Result<Self, UnitError> {
        if minor_per_km == 0 {
            return Err(UnitError::NotPositive("cost per km"));
        }
        Ok(Self(minor_per_km))
    }

    pub fn minor(self) -> u64 {
        self.0
    }

    pub fn as_major(self) -> f64 {
        self.0 as f64 / MINOR_PER_MAJOR as f64
    }
}

impl TryFrom<u64> for RatePerKm {
    type Error = UnitError;

    fn try_from(v: u64) -> Result<Self, UnitError> {
        Self::new(v)
    }
}

impl From<RatePerKm> for u64 {
    fn from(r: RatePerKm) -> u64 {
        r.0
    }
}

impl fmt::Display for RatePerKm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An amount of money in thousandths of a minor unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_milli_minor(v: u64) -> Self {
        Self(v)
    }

    pub fn from_minor(v: u64) -> Option<Self> {
        v.checked_mul(1000).map(Self)
    }

    pub fn milli_minor(self) -> u64 {
        self.0
    }

    pub fn as_minor(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn as_major(self) -> f64 {
        self.0 as f64 / (1000 * MINOR_PER_MAJOR) as f64
    }

    pub fn checked_add(self, other: Money) -> Option<Money> {
        self.0.checked_add(other.0).map(Money)
    }
}

/// Cost times distance, in millionths of a minor-unit kilometre.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuelUnits(u128);

impl FuelUnits {
    pub fn from_raw(v: u128) -> Self {
        Self(v)
    }

    pub fn raw(self) -> u128 {
        self.0
    }

    /// In major-unit kilometres.
    pub fn as_major_km(self) -> f64 {
        self.0 as f64 / (1_000_000 * MINOR_PER_MAJOR as u128) as f64
    }
}

/// `C_t = Dr x C_v`, exact.
pub fn trip_cost(dr: Km, rate: RatePerKm) -> Result<Money, UnitError> {
    dr.0.checked_mul(rate.0)
        .map(Money)
        .ok_or(UnitError::Overflow("trip cost"))
}

/// `F_u = C_t x Dr`, exact.
pub fn fuel_usage(cost: Money, dr: Km) -> FuelUnits {
    FuelUnits(cost.0 as u128 * dr.0 as u128)
}

/// Float front end for callers holding kilometres and a per-km rate.
pub fn trip_cost_km(dr_km: f64, minor_per_km: u64) -> Result<Money, UnitError> {
    trip_cost(Km::from_km(dr_km)?, RatePerKm::new(minor_per_km)?)
}

fn write_fixed(f: &mut fmt::Formatter<'_>, v: u128, scale: u32) -> fmt::Result {
    let div = 10u128.pow(scale);
    write!(f, "{}.{:0width$}", v / div, v % div, width = scale as usize)
}

fn parse_fixed(s: &str, scale: u32) -> Result<u128, UnitError> {
    let err = || UnitError::Parse(s.to_owned());
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || (s.contains('.') && !digits(frac)) || frac.len() > scale as usize {
        return Err(err());
    }
    let int: u128 = int.parse().map_err(|_| err())?;
    let frac_val: u128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
    let frac_scaled = frac_val * 10u128.pow(scale - frac.len() as u32);
    int.checked_mul(10u128.pow(scale))
        .and_then(|v| v.checked_add(frac_scaled))
        .ok_or_else(err)
}

macro_rules! decimal_text {
    ($t:ident, $inner:ty, $scale:expr) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_fixed(f, self.0 as u128, $scale)
            }
        }

        impl FromStr for $t {
            type Err = UnitError;

            fn from_str(s: &str) -> Result<Self, UnitError> {
                let v = parse_fixed(s, $scale)?;
                <$inner>::try_from(v)
                    .map(Self)
                    .map_err(|_| UnitError::Parse(s.to_owned()))
            }
        }

        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

decimal_text!(Km, u64, 3);
decimal_text!(Money, u64, 3);
decimal_text!(FuelUnits, u128, 6);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_examples() {
        let rate = RatePerKm::new(400).unwrap();
        assert_eq!(trip_cost(Km::ZERO, rate).unwrap(), Money::ZERO);
        let c = trip_cost(Km::from_km(12.5).unwrap(), rate).unwrap();
        assert_eq!(c.to_string(), "5000.000");
        assert_eq!(c.as_major(), 50.0);
        assert_eq!(Km::from_km(-1.0), Err(UnitError::Negative("distance")));
        assert!(RatePerKm::new(0).is_err());
        assert!(trip_cost_km(-1.0, 400).is_err());
    }

    #[test]
    fn fuel_examples() {
        let dr = Km::from_km(12.5).unwrap();
        assert_eq!(fuel_usage(Money::ZERO, dr), FuelUnits::default());
        let cost = Money::from_minor(5000).unwrap();
        let f = fuel_usage(cost, dr);
        assert_eq!(f.as_major_km(), 625.0);
        assert_eq!(f.to_string(), "62500.000000");
        assert_eq!(fuel_usage(cost, Km::ZERO).raw(), 0);
    }

    #[test]
    fn decimal_text_round_trips() {
        for s in ["0.000", "12.500", "18446744073709551.615"] {
            assert_eq!(s.parse::<Km>().unwrap().to_string(), s);
        }
        assert_eq!("12.5".parse::<Money>().unwrap().milli_minor(), 12_500);
        assert_eq!("7".parse::<Money>().unwrap().milli_minor(), 7_000);
        for bad in ["", ".5", "1.", "1.2345", "-1.0", "1e3", "18446744073709551.616"] {
            assert!(bad.parse::<Km>().is_err(), "{bad:?}");
        }
        let json = serde_json::to_string(&Money::from_milli_minor(5_000_000)).unwrap();
        assert_eq!(json, "\"5000.000\"");
        assert_eq!(serde_json::from_str::<Money>(&json).unwrap().milli_minor(), 5_000_000);
        assert!(serde_json::from_str::<RatePerKm>("0").is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Km::from_metres(u64::MAX);
        assert!(matches!(
            trip_cost(big, RatePerKm::new(2).unwrap()),
            Err(UnitError::Overflow(_))
        ));
    }
}
