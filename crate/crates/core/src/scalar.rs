//! Scalar abstraction shared by the exact (rational) and floating-point paths.
//!
//! Every numeric routine in the crate is written against [`Scalar`], so the
//! same code computes certified rational answers or fast `f64` estimates.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number used for every exact computation.
pub type Rational = BigRational;

/// A field element usable by the solvers.
///
/// Exact scalars compare with zero tolerance; floating scalars use
/// [`Scalar::tolerance`] for pivoting and simplex membership checks.
pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;

    /// Threshold below which a quantity is treated as zero.
    fn tolerance() -> Self;

    /// Text form used by the persisted file schemas.
    fn to_text(&self) -> String;
    fn from_text(s: &str) -> Option<Self>;

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    /// `self > tolerance`.
    fn is_positive_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    /// `|self| <= tolerance`.
    fn is_zero_tol(&self) -> bool {
        self.abs() <= Self::tolerance()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }

    fn from_text(s: &str) -> Option<Self> {
        parse_rational(s).ok()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-12
    }

    fn to_text(&self) -> String {
        // shortest round-trip representation
        format!("{self:?}")
    }

    fn from_text(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r) as f32
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn tolerance() -> Self {
        1e-5
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn from_text(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    if let Some(x) = num_traits::ToPrimitive::to_f64(r) {
        if x.is_finite() {
            return x;
        }
    }
    // Fall back to scaling when numerator or denominator overflow f64.
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(0.0);
    let d = (d >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Parses `"p/q"`, an integer, or a decimal with a finite expansion such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let r = Rational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Sum of a slice of scalars with a fixed left-to-right order.
pub fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |acc, x| acc + x.clone())
}
