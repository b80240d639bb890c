//! Scalar types the algebra is generic over.
//!
//! Two regimes exist. Exact scalars (arbitrary-precision rationals) make every
//! condition check a rational identity; float scalars (`f64`, `f32`) allow
//! irrational atoms and use tolerances. The regime is carried by the type, so
//! exact and float values can never be mixed inside one expression.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used in exact mode.
pub type Rational = BigRational;

/// Non-negative rational exponent.
pub type Exponent = Ratio<u64>;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static
{
    /// `true` for rational scalars: comparisons are equalities, no tolerances.
    const EXACT: bool;

    /// Name of the mode, as used in problem files and reports.
    const MODE: &'static str;

    fn from_ratio(num: BigInt, den: BigInt) -> Self;

    /// Exact scalars only accept finite floats and convert them without rounding.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn to_rational(&self) -> Option<Rational>;

    /// `self^exp` for `self >= 0` with `0^0 = 1`.
    ///
    /// Exact scalars return `None` when the power is irrational.
    fn pow_exponent(&self, exp: &Exponent) -> Option<Self>;

    /// Equality up to `tol * (1 + |self|)` for floats; plain equality when exact.
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            let a = self.to_f64();
            (a - other.to_f64()).abs() <= tol * (1.0 + a.abs())
        }
    }

    /// JSON rendering: `"p/q"` strings for exact values, numbers for floats.
    fn to_json(&self) -> serde_json::Value;

    /// Reads a coefficient literal: `"p/q"`, an integer, or a decimal.
    fn parse_literal(text: &str) -> Option<Self> {
        let r = parse_rational(text)?;
        Some(Self::from_ratio(r.numer().clone(), r.denom().clone()))
    }

    fn from_usize(k: usize) -> Self {
        Self::from_ratio(BigInt::from(k), BigInt::from(1))
    }
}

fn int_pow<S: Scalar>(base: &S, exp: u64) -> S {
    num_traits::pow::pow(base.clone(), exp as usize)
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn from_ratio(num: BigInt, den: BigInt) -> Self {
        BigRational::new(num, den)
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator or denominator beyond f64 range
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn pow_exponent(&self, exp: &Exponent) -> Option<Self> {
        let base = int_pow(self, *exp.numer());
        if exp.is_integer() {
            return Some(base);
        }
        if base.is_negative() {
            return None;
        }
        let k = u32::try_from(*exp.denom()).ok()?;
        let root = |x: &BigInt| {
            let r = x.nth_root(k);
            (num_traits::pow::pow(r.clone(), k as usize) == *x).then_some(r)
        };
        Some(BigRational::new(root(base.numer())?, root(base.denom())?))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

macro_rules! float_scalar {
    ($t:ty, $mode:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            const MODE: &'static str = $mode;

            fn from_ratio(num: BigInt, den: BigInt) -> Self {
                let r = BigRational::new(num, den);
                ToPrimitive::to_f64(&r).unwrap_or(f64::NAN) as $t
            }

            fn from_f64(x: f64) -> Option<Self> {
                Some(x as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_rational(&self) -> Option<Rational> {
                BigRational::from_float(*self)
            }

            fn pow_exponent(&self, exp: &Exponent) -> Option<Self> {
                if exp.is_zero() {
                    return Some(1.0);
                }
                if exp.is_integer() && *exp.numer() <= i32::MAX as u64 {
                    return Some(self.powi(*exp.numer() as i32));
                }
                let e = *exp.numer() as f64 / *exp.denom() as f64;
                Some(self.powf(e as $t))
            }

            fn parse_literal(text: &str) -> Option<Self> {
                let text = text.trim();
                let v = match text.split_once('/') {
                    Some((n, d)) => {
                        let n: $t = n.trim().parse().ok()?;
                        let d: $t = d.trim().parse().ok()?;
                        n / d
                    }
                    None => {
                        // reject "inf", "nan" and friends
                        if !text.bytes().all(|b| b.is_ascii_digit() || b".eE+-".contains(&b)) {
                            return None;
                        }
                        text.parse().ok()?
                    }
                };
                v.is_finite().then_some(v)
            }

            fn to_json(&self) -> serde_json::Value {
                serde_json::Number::from_f64(*self as f64)
                    .map(serde_json::Value::Number)
                    .unwrap_or(serde_json::Value::Null)
            }
        }
    };
}

float_scalar!(f64, "float");
float_scalar!(f32, "float");

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"2.5"` / `"1e-3"` into
/// an exact rational. Decimals are read through their decimal expansion, so
/// `"0.1"` is exactly `1/10`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    parse_decimal(text)
}

const MAX_DECIMAL_EXPONENT: u32 = 4096;

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    if exp.unsigned_abs() > MAX_DECIMAL_EXPONENT {
        return None;
    }
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

pub fn rational_to_scalar<S: Scalar>(r: &Rational) -> S {
    S::from_ratio(r.numer().clone(), r.denom().clone())
}

pub fn exponent_to_rational(e: &Exponent) -> Rational {
    BigRational::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()))
}
