//! Exact rationals and their `p/q` string form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid fraction `{0}`")]
pub struct FractionError(pub String);

/// Parses `p`, `-p`, or `p/q` with integer `p`, `q` (q ≠ 0).
pub fn parse_fraction(text: &str) -> Result<Rational, FractionError> {
    let err = || FractionError(text.to_owned());
    let s = text.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_fraction(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The value as a small non-negative integer, if it is one.
pub fn as_index(q: &Rational) -> Option<usize> {
    if !q.is_integer() {
        return None;
    }
    usize::try_from(q.to_integer()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_fractions() {
        for (text, canon) in [("1/2", "1/2"), ("2/4", "1/2"), ("3", "3"), ("-6/4", "-3/2"), (" 0/5 ", "0")] {
            assert_eq!(format_fraction(&parse_fraction(text).unwrap()), canon);
        }
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a/b", "0.5", "1/2/3"] {
            assert!(parse_fraction(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn index_conversion() {
        assert_eq!(as_index(&int(3)), Some(3));
        assert_eq!(as_index(&frac(1, 2)), None);
        assert_eq!(as_index(&int(-1)), None);
    }
}
