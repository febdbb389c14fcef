//! Values in the divisible hull of the value group, extended by `±∞`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Rational64;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational value, `+∞` or `-∞`.
///
/// Field valuations always have denominator 1; fractional values only
/// appear as radii `η/n` of balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValQ {
    NegInf,
    Fin(Rational64),
    PosInf,
}

impl ValQ {
    pub const INF: ValQ = ValQ::PosInf;

    pub fn int(n: i64) -> Self {
        ValQ::Fin(Rational64::from_integer(n))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        ValQ::Fin(Rational64::new(num, den))
    }

    pub fn zero() -> Self {
        ValQ::int(0)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ValQ::Fin(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, ValQ::Fin(r) if r.is_integer())
    }

    /// The integer value, if this is a finite integer.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            ValQ::Fin(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    pub fn floor(&self) -> Option<i64> {
        match self {
            ValQ::Fin(r) => Some(r.floor().to_integer()),
            _ => None,
        }
    }

    pub fn ceil(&self) -> Option<i64> {
        match self {
            ValQ::Fin(r) => Some(r.ceil().to_integer()),
            _ => None,
        }
    }

    /// Addition with the usual conventions; `(+∞) + (−∞)` is rejected.
    pub fn checked_add(self, other: ValQ) -> Result<ValQ> {
        use ValQ::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => {
                Err(Error::Invalid("(+inf) + (-inf) is undefined".into()))
            }
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Fin(a), Fin(b)) => Ok(Fin(a + b)),
        }
    }

    /// Multiplication by a nonnegative integer (`0·∞` is taken as 0).
    pub fn scale(self, k: i64) -> ValQ {
        assert!(k >= 0, "ValQ::scale expects a nonnegative factor");
        match self {
            _ if k == 0 => ValQ::zero(),
            ValQ::Fin(r) => ValQ::Fin(r * k),
            other => other,
        }
    }

    /// Division by a positive integer.
    pub fn div_int(self, n: i64) -> ValQ {
        assert!(n > 0);
        match self {
            ValQ::Fin(r) => ValQ::Fin(r / n),
            other => other,
        }
    }

    pub fn min(self, other: ValQ) -> ValQ {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ValQ) -> ValQ {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Parses `inf`, `-inf`, `n` or `n/d`.
    pub fn parse(s: &str) -> Result<ValQ> {
        let s = s.trim();
        match s {
            "inf" | "+inf" => return Ok(ValQ::PosInf),
            "-inf" => return Ok(ValQ::NegInf),
            _ => {}
        }
        let bad = || Error::Invalid(format!("bad value '{s}'"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d <= 0 {
                return Err(bad());
            }
            Ok(ValQ::frac(n, d))
        } else {
            Ok(ValQ::int(s.parse().map_err(|_| bad())?))
        }
    }
}

impl From<i64> for ValQ {
    fn from(n: i64) -> Self {
        ValQ::int(n)
    }
}

impl PartialOrd for ValQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValQ {
    fn cmp(&self, other: &Self) -> Ordering {
        use ValQ::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl Add for ValQ {
    type Output = ValQ;
    /// Panics on `(+∞) + (−∞)`; use [`ValQ::checked_add`] where that can occur.
    fn add(self, rhs: ValQ) -> ValQ {
        self.checked_add(rhs).expect("undefined infinite sum")
    }
}

impl Neg for ValQ {
    type Output = ValQ;
    fn neg(self) -> ValQ {
        match self {
            ValQ::NegInf => ValQ::PosInf,
            ValQ::PosInf => ValQ::NegInf,
            ValQ::Fin(r) => ValQ::Fin(-r),
        }
    }
}

impl Sub for ValQ {
    type Output = ValQ;
    fn sub(self, rhs: ValQ) -> ValQ {
        self + (-rhs)
    }
}

impl fmt::Display for ValQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValQ::NegInf => write!(f, "-inf"),
            ValQ::PosInf => write!(f, "inf"),
            ValQ::Fin(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            ValQ::Fin(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Serialize for ValQ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ValQ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ValQ::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_with_infinities() {
        assert!(ValQ::NegInf < ValQ::int(-1000));
        assert!(ValQ::frac(1, 2) < ValQ::int(1));
        assert!(ValQ::int(7) < ValQ::PosInf);
        assert_eq!(ValQ::frac(2, 4), ValQ::frac(1, 2));
    }

    #[test]
    fn infinite_sums() {
        assert_eq!(ValQ::int(3) + ValQ::PosInf, ValQ::PosInf);
        assert!(ValQ::PosInf.checked_add(ValQ::NegInf).is_err());
        assert_eq!(ValQ::frac(1, 2) + ValQ::frac(1, 2), ValQ::int(1));
    }

    #[test]
    fn parse_and_print() {
        for s in ["inf", "-inf", "3", "-7/2"] {
            assert_eq!(ValQ::parse(s).unwrap().to_string(), s);
        }
        assert!(ValQ::parse("1/0").is_err());
        assert_eq!(ValQ::frac(7, 2).floor(), Some(3));
        assert_eq!(ValQ::frac(-7, 2).ceil(), Some(-3));
    }
}
