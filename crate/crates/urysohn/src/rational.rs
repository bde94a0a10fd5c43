//! Exact rational arithmetic for distances and spectrum elements.
//!
//! Every distance in this crate is a [`Rational`]: a reduced fraction of
//! `i64` integers. No floating point is used anywhere in spectrum or metric
//! logic, so equality, ordering, and interval tests are exact. The textual
//! form is `"p"` or `"p/q"` with `q > 0`; that form is also the JSON
//! encoding, which keeps serialized artifacts free of rounding artifacts.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number backed by a reduced `i64` fraction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `numer / denom` in lowest terms.
    ///
    /// # Panics
    /// Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Rational {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_int(n: i64) -> Rational {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    /// `|self - other|`, the absolute difference.
    pub fn abs_diff(&self, other: Rational) -> Rational {
        (*self - other).abs()
    }

    /// Exact half. Used by initial-number tests of the form `[s/2, s)`.
    pub fn halved(&self) -> Rational {
        Rational(self.0 / 2)
    }

    /// Exact double. Used by jump-number tests of the form `(s, 2s]`.
    pub fn doubled(&self) -> Rational {
        Rational(self.0 * 2)
    }

    pub fn min(self, other: Rational) -> Rational {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error produced when parsing a rational from text fails.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Rational, ParseRationalError> {
        let fail = |reason: &str| ParseRationalError {
            input: s.to_owned(),
            reason: reason.to_owned(),
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(fail("empty string"));
        }
        match t.split_once('/') {
            None => {
                let n: i64 = t.parse().map_err(|_| fail("not an integer"))?;
                Ok(Rational::from_int(n))
            }
            Some((num, den)) => {
                let n: i64 = num.trim().parse().map_err(|_| fail("bad numerator"))?;
                let d: i64 = den.trim().parse().map_err(|_| fail("bad denominator"))?;
                if d == 0 {
                    return Err(fail("zero denominator"));
                }
                Ok(Rational::new(n, d))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse()
            .map_err(|e: ParseRationalError| D::Error::custom(format!("{e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "1", "-3", "3/2", "-7/4", "10/4"] {
            let r = q(s);
            let back: Rational = r.to_string().parse().unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(q("10/4"), q("5/2"));
        assert_eq!(q("10/4").to_string(), "5/2");
        assert_eq!(q("4/2").to_string(), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "a", "1/0", "1/2/3", "1.5"] {
            assert!(s.parse::<Rational>().is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn ordering_is_exact() {
        assert!(q("1/3") < q("1/2"));
        assert!(q("2/3") > q("1/2"));
        assert!(q("-1") < Rational::ZERO);
        assert_eq!(q("1/2").max(q("2/3")), q("2/3"));
    }

    #[test]
    fn arithmetic_and_halving() {
        assert_eq!(q("1/2") + q("1/3"), q("5/6"));
        assert_eq!(q("1/2") - q("1/3"), q("1/6"));
        assert_eq!(q("1/3").doubled(), q("2/3"));
        assert_eq!(q("1/3").halved(), q("1/6"));
        assert_eq!(q("1/3").abs_diff(q("1/2")), q("1/6"));
        assert_eq!(q("-5/7").abs(), q("5/7"));
    }

    #[test]
    fn serde_uses_fraction_strings() {
        let r = q("3/2");
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"3/2\"");
        let back: Rational = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Rational>("1.5").is_err());
    }
}
