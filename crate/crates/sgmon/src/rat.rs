//! Rational scalar helpers shared across the crate.
//!
//! All probabilities and payoffs are exact rationals end to end: the garbling
//! feasibility boundaries are knife-edge sensitive, so floating point would
//! make the deciders ill-posed.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Rational from an integer pair.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Integer-valued rational.
pub fn rint(value: i64) -> Rational {
    Rational::from_integer(value.into())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer part in {0:?}")]
    BadInteger(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses "num/den" or a plain integer string.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let numer =
        BigInt::from_str(n).map_err(|_| ParseRationalError::BadInteger(text.to_string()))?;
    let denom = match d {
        None => BigInt::one(),
        Some(d) => {
            BigInt::from_str(d).map_err(|_| ParseRationalError::BadInteger(text.to_string()))?
        }
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical string form: plain integer when the denominator is one,
/// otherwise "num/den" in lowest terms with a positive denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation for human-facing columns only.
pub fn approx(r: &Rational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let scale = BigInt::from(1_000_000_000i64);
    let q = (n * &scale) / d;
    let v: f64 = q.to_string().parse().unwrap_or(f64::NAN);
    v / 1e9
}

/// δ^k for a nonnegative integer exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Extended rational with a single +∞ point, for likelihood ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtRational {
    Finite(Rational),
    PosInfinity,
}

impl ExtRational {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::PosInfinity => None,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), PosInfinity) => std::cmp::Ordering::Less,
            (PosInfinity, Finite(_)) => std::cmp::Ordering::Greater,
            (PosInfinity, PosInfinity) => std::cmp::Ordering::Equal,
        }
    }
}

impl std::fmt::Display for ExtRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", format_rational(r)),
            ExtRational::PosInfinity => write!(f, "inf"),
        }
    }
}

/// Ratio a/b with the conventions 0/0 = 1 and x/0 = +∞ for x > 0.
pub fn likelihood_ratio(a: &Rational, b: &Rational) -> ExtRational {
    if b.is_zero() {
        if a.is_zero() {
            ExtRational::Finite(Rational::one())
        } else {
            ExtRational::PosInfinity
        }
    } else {
        ExtRational::Finite(a / b)
    }
}

/// Exact sum of a rational iterator.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Rational>) -> Rational {
    items
        .into_iter()
        .fold(Rational::zero(), |acc, r| acc + r)
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}
