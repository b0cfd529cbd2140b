//! Exact rational weights.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number kept in lowest terms with a positive denominator.
///
/// Equality is structural because the representation is canonical. Edge
/// weights are strictly positive; the type itself also represents zero and
/// negative values so that objective sums and differences stay in one type.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(Ratio<i128>);

impl Weight {
    pub fn new(numer: i128, denom: i128) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Weight(Ratio::new(numer, denom)))
    }

    pub fn from_integer(v: i128) -> Self {
        Weight(Ratio::from_integer(v))
    }

    pub fn zero() -> Self {
        Weight(Ratio::zero())
    }

    pub fn one() -> Self {
        Weight(Ratio::one())
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Wire form: always `p/q`, lowest terms, even for integers.
    pub fn to_wire(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Midpoint of two weights.
    pub fn midpoint(a: Weight, b: Weight) -> Weight {
        (a + b) / Weight::from_integer(2)
    }
}

impl From<i64> for Weight {
    fn from(v: i64) -> Self {
        Weight::from_integer(v as i128)
    }
}

impl From<i32> for Weight {
    fn from(v: i32) -> Self {
        Weight::from_integer(v as i128)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Accepts `p/q` or a bare integer. Decimals are rejected.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<i128, Error> {
            t.trim()
                .parse::<i128>()
                .map_err(|_| Error::Parse(format!("not an exact rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((p, q)) => Weight::new(parse_int(p)?, parse_int(q)?),
            None => Ok(Weight::from_integer(parse_int(s)?)),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_wire())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(v) => Ok(Weight::from(v)),
        }
    }
}

macro_rules! forward_binop {
    ($Op:ident, $op:ident) => {
        impl $Op for Weight {
            type Output = Weight;
            fn $op(self, rhs: Weight) -> Weight {
                Weight(self.0.$op(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_is_structural() {
        assert_eq!(Weight::new(2, 4).unwrap(), Weight::new(1, 2).unwrap());
        assert_eq!(Weight::new(3, -6).unwrap().to_wire(), "-1/2");
        assert_eq!(Weight::from(3).to_wire(), "3/1");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("7".parse::<Weight>().unwrap(), Weight::from(7));
        assert_eq!(
            " 6/4 ".parse::<Weight>().unwrap(),
            Weight::new(3, 2).unwrap()
        );
        assert!("0.5".parse::<Weight>().is_err());
        assert!("1/0".parse::<Weight>().is_err());
    }

    #[test]
    fn multiply_then_divide_round_trips() {
        let a = Weight::new(5, 7).unwrap();
        let c = Weight::new(11, 3).unwrap();
        assert_eq!((a * c) / c, a);
    }

    #[test]
    fn serde_accepts_integer_shorthand() {
        let w: Weight = serde_json::from_str("4").unwrap();
        assert_eq!(w, Weight::from(4));
        let w: Weight = serde_json::from_str("\"8/6\"").unwrap();
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"4/3\"");
    }
}
