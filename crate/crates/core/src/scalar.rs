//! Number systems for series evaluation.
//!
//! Two implementations of [`Scalar`] are provided: [`ExactScalar`], the field
//! of Gaussian rationals `Q(i)` with arbitrary precision components, and
//! [`FloatScalar`], a thin wrapper over a complex double. Every evaluator in
//! the crate is generic over the trait, so a formula is written once and run
//! in either mode.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ScalarError;

/// Which arithmetic a scalar type implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(ScalarError::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// The arithmetic contract shared by both number systems.
///
/// Methods take operands by reference so bignum values are not cloned on
/// every operation.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_exact(v: &ExactScalar) -> Self;

    fn is_zero(&self) -> bool;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self, ScalarError>;

    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// `self^k` by binary exponentiation; `x^0 = 1` for every `x`, including 0.
    fn pow_int(&self, k: i64) -> Result<Self, ScalarError> {
        if k == 0 {
            return Ok(Self::one());
        }
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        loop {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = sq.mul(&sq);
        }
        Ok(acc)
    }

    /// Compares `|self|` against 1.
    fn modulus_cmp_one(&self) -> Ordering;

    fn to_float(&self) -> FloatScalar;

    /// The float value as `Self`; `None` in exact mode.
    fn from_float(v: &FloatScalar) -> Option<Self>;

    /// Bit length of the largest numerator/denominator component; 0 in float mode.
    fn height_bits(&self) -> u64;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

// ---------------------------------------------------------------------------
// Exact Gaussian rationals
// ---------------------------------------------------------------------------

/// An element `re + im·i` of `Q(i)`.
///
/// Both components are reduced `BigRational`s with positive denominators, so
/// the representation is canonical and `==` is exact field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    re: BigRational,
    im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        ExactScalar { re, im: BigRational::zero() }
    }

    /// The rational `num/den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in ExactScalar::ratio");
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        ExactScalar { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `re² + im²`, exactly.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> Self {
        ExactScalar { re: self.re.clone(), im: -&self.im }
    }

    /// Structural cross-check of the canonical-form invariant.
    pub fn is_canonical(&self) -> bool {
        fn ok(r: &BigRational) -> bool {
            let g = num_integer::Integer::gcd(r.numer(), r.denom());
            r.denom().is_positive() && (g.is_one() || r.numer().is_zero() && r.denom().is_one())
        }
        ok(&self.re) && ok(&self.im)
    }
}

fn rational_bits(r: &BigRational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(&self.re, f);
        }
        if !self.re.is_zero() {
            fmt_rational(&self.re, f)?;
            if self.im.is_positive() {
                f.write_str("+")?;
            }
        }
        fmt_rational(&self.im, f)?;
        f.write_str(" i")
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_rational(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::Parse(format!("invalid rational literal `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = num.trim_start_matches('+');
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(ScalarError::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

impl FromStr for ExactScalar {
    type Err = ScalarError;

    /// Accepts `p`, `p/r`, `p/r+s/t i`, `s/t i`, `i`, `-i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(ScalarError::Parse("empty scalar literal".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(&t)?));
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let re = if re.is_empty() { BigRational::zero() } else { parse_rational(re)? };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        Ok(ExactScalar { re, im })
    }
}

impl Scalar for ExactScalar {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Self::real(BigRational::zero())
    }

    fn one() -> Self {
        Self::real(BigRational::one())
    }

    fn from_i64(v: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(v)))
    }

    fn from_exact(v: &ExactScalar) -> Self {
        v.clone()
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        ExactScalar { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }

    fn sub(&self, rhs: &Self) -> Self {
        ExactScalar { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Self::real(&self.re * &rhs.re);
        }
        ExactScalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    fn neg(&self) -> Self {
        ExactScalar { re: -&self.re, im: -&self.im }
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Self::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Ok(ExactScalar { re: &self.re / &n, im: -&self.im / &n })
    }

    fn modulus_cmp_one(&self) -> Ordering {
        self.norm_sqr().cmp(&BigRational::one())
    }

    fn from_float(_: &FloatScalar) -> Option<Self> {
        None
    }

    fn to_float(&self) -> FloatScalar {
        fn f(r: &BigRational) -> f64 {
            r.to_f64().unwrap_or(f64::NAN)
        }
        FloatScalar(Complex64::new(f(&self.re), f(&self.im)))
    }

    fn height_bits(&self) -> u64 {
        rational_bits(&self.re).max(rational_bits(&self.im))
    }
}

// ---------------------------------------------------------------------------
// Complex floating point
// ---------------------------------------------------------------------------

/// A complex double. Division by zero follows IEEE semantics except where a
/// caller asks for [`Scalar::inv`], which reports it.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct FloatScalar(pub Complex64);

impl FloatScalar {
    pub fn new(re: f64, im: f64) -> Self {
        FloatScalar(Complex64::new(re, im))
    }

    pub fn abs(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    pub fn sqrt(&self) -> Self {
        FloatScalar(self.0.sqrt())
    }
}

impl fmt::Display for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im == 0.0 {
            write!(f, "{:e}", self.0.re)
        } else {
            write!(f, "{:e}{:+e} i", self.0.re, self.0.im)
        }
    }
}

impl fmt::Debug for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Scalar for FloatScalar {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        FloatScalar::new(0.0, 0.0)
    }

    fn one() -> Self {
        FloatScalar::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        FloatScalar::new(v as f64, 0.0)
    }

    fn from_exact(v: &ExactScalar) -> Self {
        v.to_float()
    }

    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }

    fn add(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 + rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 - rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 * rhs.0)
    }

    fn neg(&self) -> Self {
        FloatScalar(-self.0)
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(FloatScalar(self.0.inv()))
    }

    fn modulus_cmp_one(&self) -> Ordering {
        self.0.norm_sqr().partial_cmp(&1.0).unwrap_or(Ordering::Equal)
    }

    fn to_float(&self) -> FloatScalar {
        *self
    }

    fn from_float(v: &FloatScalar) -> Option<Self> {
        Some(*v)
    }

    fn height_bits(&self) -> u64 {
        0
    }
}

/// `|a − b| ≤ rel_tol · max(1, |a|, |b|)`.
pub fn approx_eq(a: &FloatScalar, b: &FloatScalar, rel_tol: f64) -> bool {
    debug_assert!(rel_tol > 0.0);
    (a.0 - b.0).norm() <= rel_tol * 1f64.max(a.abs()).max(b.abs())
}

/// The scaled residual used by [`approx_eq`]: `|a − b| / max(1, |a|, |b|)`.
pub fn relative_residual(a: &FloatScalar, b: &FloatScalar) -> f64 {
    (a.0 - b.0).norm() / 1f64.max(a.abs()).max(b.abs())
}
