//! Scalar backends for the jet algebra.
//!
//! Every recursion in this crate is generic over [`Scalar`], which is implemented
//! for four types:
//!
//! * `f64` — double precision, the workhorse for field evaluation and bounds;
//! * [`Complex64`] — complex double precision (Ginzburg–Landau and friends);
//! * [`Rational`] — arbitrary-precision rationals, for bit-exact oracle tests;
//! * [`CRational`] — Gaussian rationals, the exact complex backend.
//!
//! The exact backends make the jet recursions exactly testable; bound
//! certification always goes through `f64` magnitudes (`abs_f64`) with
//! log-domain factorials, since the envelopes involve factorials far beyond
//! double range.

use num::bigint::BigInt;
use num::rational::{BigRational, Ratio};
use num::Complex;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arbitrary-precision rational scalar.
pub type Rational = BigRational;
/// Gaussian rational scalar (exact complex).
pub type CRational = Complex<BigRational>;
/// Complex double-precision scalar.
pub type Complex64 = Complex<f64>;

/// Common interface of the four scalar backends.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Entries of this type are exact (rational arithmetic, no rounding).
    const EXACT: bool;
    /// Entries of this type carry an imaginary part.
    const COMPLEX: bool;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact binomial coefficient lifted into the scalar.
    fn from_binomial(n: u32, k: u32) -> Self;
    /// Embed a float pair; `None` when the backend cannot represent it exactly
    /// (exact backends reject non-representable floats rather than guessing).
    fn try_from_f64_pair(re: f64, im: f64) -> Option<Self>;
    fn conj(&self) -> Self;
    /// Modulus as `f64` (approximate for exact backends; used only in bounds).
    fn abs_f64(&self) -> f64;
    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;
}

fn big_binomial(n: u32, k: u32) -> BigInt {
    let k = k.min(n - k.min(n));
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Binomial coefficient as `f64` (exact up to 2^53, monotone loss past it).
pub fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const COMPLEX: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_binomial(n: u32, k: u32) -> Self {
        binomial_f64(n, k)
    }
    fn try_from_f64_pair(re: f64, im: f64) -> Option<Self> {
        if im == 0.0 {
            Some(re)
        } else {
            None
        }
    }
    fn conj(&self) -> Self {
        *self
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
    fn re_f64(&self) -> f64 {
        *self
    }
    fn im_f64(&self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const COMPLEX: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(num as f64 / den as f64, 0.0)
    }
    fn from_binomial(n: u32, k: u32) -> Self {
        Complex::new(binomial_f64(n, k), 0.0)
    }
    fn try_from_f64_pair(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re, im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
    fn re_f64(&self) -> f64 {
        self.re
    }
    fn im_f64(&self) -> f64 {
        self.im
    }
}

fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const COMPLEX: bool = false;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_binomial(n: u32, k: u32) -> Self {
        BigRational::from_integer(big_binomial(n, k))
    }
    fn try_from_f64_pair(re: f64, im: f64) -> Option<Self> {
        if im == 0.0 {
            rational_from_f64(re)
        } else {
            None
        }
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn abs_f64(&self) -> f64 {
        rational_to_f64(self).abs()
    }
    fn re_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn im_f64(&self) -> f64 {
        0.0
    }
}

impl Scalar for CRational {
    const EXACT: bool = true;
    const COMPLEX: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex::new(Rational::from_i64(v), BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(Rational::from_ratio(num, den), BigRational::zero())
    }
    fn from_binomial(n: u32, k: u32) -> Self {
        Complex::new(Rational::from_binomial(n, k), BigRational::zero())
    }
    fn try_from_f64_pair(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(rational_from_f64(re)?, rational_from_f64(im)?))
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn abs_f64(&self) -> f64 {
        let re = rational_to_f64(&self.re);
        let im = rational_to_f64(&self.im);
        re.hypot(im)
    }
    fn re_f64(&self) -> f64 {
        rational_to_f64(&self.re)
    }
    fn im_f64(&self) -> f64 {
        rational_to_f64(&self.im)
    }
}

/// Convert a big rational to `f64`, tolerating magnitudes beyond double range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Fall back to a log-domain estimate for extreme magnitudes.
        let sign = if r < &BigRational::zero() { -1.0 } else { 1.0 };
        let bits = r.numer().bits() as f64 - r.denom().bits() as f64;
        sign * (bits * std::f64::consts::LN_2).exp()
    })
}
