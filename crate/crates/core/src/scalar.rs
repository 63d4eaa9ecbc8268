//! Arithmetic backends shared by the transport solver and the metric iteration.
//!
//! Two backends exist: exact big rationals and `f64`. Everything generic over
//! [`Scalar`] runs unchanged on both; the float backend compares against a
//! small absolute tolerance where the exact backend compares against zero.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational number used throughout the crate.
pub type Rational = BigRational;

/// Arithmetic mode of a computation. Always explicit, never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

impl std::fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arithmetic::Exact => f.write_str("exact"),
            Arithmetic::Float => f.write_str("float"),
        }
    }
}

/// Absolute tolerance used by the float backend.
pub const FLOAT_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Arithmetic;

    /// Strictly positive beyond the backend tolerance.
    fn is_pos(&self) -> bool;
    /// Strictly negative beyond the backend tolerance.
    fn is_neg(&self) -> bool;

    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    fn from_u64(v: u64) -> Self;

    fn abs_val(&self) -> Self {
        if self.is_neg() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const MODE: Arithmetic = Arithmetic::Exact;

    fn is_pos(&self) -> bool {
        self.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
}

impl Scalar for f64 {
    const MODE: Arithmetic = Arithmetic::Float;

    fn is_pos(&self) -> bool {
        *self > FLOAT_TOL
    }

    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOL
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }

    fn from_u64(v: u64) -> Self {
        v as f64
    }
}

/// A scalar result tagged with the arithmetic that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    pub fn mode(&self) -> Arithmetic {
        match self {
            Value::Exact(_) => Arithmetic::Exact,
            Value::Float(_) => Arithmetic::Float,
        }
    }
}

impl std::fmt::Display for Value {
    /// Exact values print as `p/q`, floats in shortest round-trip form.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&fraction_string(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Converts a rational to the nearest representable `f64`, including values
/// whose numerator and denominator individually overflow `f64`.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let numer_bits = r.numer().bits() as i64;
    let denom_bits = r.denom().bits() as i64;
    let shift = numer_bits.max(denom_bits) - 900;
    if shift <= 0 {
        return f64::NAN;
    }
    let n = r.numer() >> (shift as usize);
    let d = r.denom() >> (shift as usize);
    let nf = n.to_f64().unwrap_or(0.0);
    let df = d.to_f64().unwrap_or(f64::INFINITY);
    nf / df
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats a rational as `p/q`, always including the denominator.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, an integer, or a decimal literal such as `0.25` (read exactly).
pub fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let numer: BigInt = digits.parse().ok()?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(numer, denom);
        return Some(if negative { -r } else { r });
    }
    let p: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(p))
}

pub fn denominator_bits(r: &Rational) -> u64 {
    r.denom().bits()
}

pub fn rational_one() -> Rational {
    Rational::one()
}

pub fn rational_zero() -> Rational {
    Rational::zero()
}
