//! Numeric abstraction. The solver core is written against [`Scalar`] so the
//! same simplex and matching code runs on exact rationals (the default) and on
//! `f64` for quick cross-checks.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + Send
    + Sync
    + 'static
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    /// Whether comparisons are exact; float scalars compare with a tolerance.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;
    fn from_int(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn tolerance() -> Self;

    /// Common-denominator integer form `(numerators, denominator)` when it
    /// fits in machine words. Used by enumeration-heavy loops.
    fn scaled_ints(_xs: &[Self]) -> Option<(Vec<i128>, i128)> {
        None
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_int(n) / Self::from_int(d)
    }
    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }
    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }
    fn is_nil(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    /// Three-way comparison respecting the tolerance.
    fn cmp_tol(&self, other: &Self) -> Ordering {
        let mut d = self.clone();
        d -= other;
        if d.is_pos() {
            Ordering::Greater
        } else if d.is_neg() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r *= other;
        r
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn scaled_ints(xs: &[Self]) -> Option<(Vec<i128>, i128)> {
        let mut den = BigInt::one();
        for x in xs {
            if !x.is_zero() {
                den = den.lcm(x.denom());
            }
        }
        let d = den.to_i128()?;
        if d > (1i128 << 62) {
            return None;
        }
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            let v = (x.numer() * (&den / x.denom())).to_i128()?;
            if v.abs() > (1i128 << 62) {
                return None;
            }
            out.push(v);
        }
        Some((out, d))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-9
    }
}

/// The exact scalar used throughout the pipeline.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// A nonnegative real `√s` for rational `s ≥ 0`. Quantities like `1/√k` and
/// `√k/4` are irrational, so comparisons against them are done by squaring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    square: Rational,
}

impl Radical {
    pub fn sqrt_of(square: Rational) -> Self {
        assert!(!square.is_negative(), "radicand must be nonnegative");
        Radical { square }
    }

    /// Radical whose value is the given nonnegative rational.
    pub fn from_value(v: &Rational) -> Self {
        assert!(!v.is_negative());
        Radical { square: v * v }
    }

    pub fn square(&self) -> &Rational {
        &self.square
    }

    pub fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.square).unwrap_or(f64::NAN).sqrt()
    }

    /// `a ≤ self·b` for `b ≥ 0`.
    pub fn scaled_at_least<T: Scalar>(&self, a: &T, b: &T) -> bool {
        if !a.is_pos() {
            return true;
        }
        let lhs = a.mul_ref(a);
        let rhs = T::from_rational(&self.square).mul_ref(&b.mul_ref(b));
        lhs.cmp_tol(&rhs) != Ordering::Greater
    }

    /// `a ≥ self·b` for `b ≥ 0`.
    pub fn scaled_at_most<T: Scalar>(&self, a: &T, b: &T) -> bool {
        if a.is_neg() {
            return false;
        }
        let lhs = a.mul_ref(a);
        let rhs = T::from_rational(&self.square).mul_ref(&b.mul_ref(b));
        lhs.cmp_tol(&rhs) != Ordering::Less
    }
}

impl Display for Radical {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sqrt({})", self.square)
    }
}
