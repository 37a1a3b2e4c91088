//! Exact rationals and the small field abstraction shared by the exact and
//! floating evaluation paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact dyadic value of a finite float.
pub fn from_f64_exact(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// Shortest continued-fraction convergent within `rel_tol·max(1,|x|)` of `x`.
pub fn approximate(x: f64, rel_tol: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite value {x}")));
    }
    let tol = rel_tol * x.abs().max(1.0);
    let exact = from_f64_exact(x)?;
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    for _ in 0..128 {
        let a = rem.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        let cand = Rational::new(h2.clone(), k2.clone());
        if (to_f64(&cand) - x).abs() <= tol || cand == exact {
            return Ok(cand);
        }
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Ok(cand);
        }
        rem = frac.recip();
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    Ok(exact)
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    num::integer::Integer::gcd(a, b)
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    num::integer::Integer::lcm(a, b)
}

/// Arithmetic needed by the simplex closed forms; implemented for exact
/// rationals and for `f64`.
pub trait Field:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rational(q: &Rational) -> Self;
    fn from_usize(n: usize) -> Self;
}

impl Field for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

impl Field for f64 {
    fn from_rational(q: &Rational) -> Self {
        to_f64(q)
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("3/-6").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&rat(10, 4)), "5/2");
        assert_eq!(format_rational(&rat(-8, 4)), "-2");
    }

    #[test]
    fn continued_fraction_snapshot() {
        assert_eq!(approximate(0.2, 1e-13).unwrap(), rat(1, 5));
        assert_eq!(approximate(-1.0 / 3.0, 1e-13).unwrap(), rat(-1, 3));
        assert_eq!(approximate(0.0, 1e-13).unwrap(), int(0));
        let x = 1.0 / (6.0 * 5f64.sqrt());
        let q = approximate(x, 1e-13).unwrap();
        assert!((to_f64(&q) - x).abs() <= 1e-13);
    }
}
