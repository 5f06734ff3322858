//! Numeric backends.
//!
//! Every structure in the crate is generic over [`Scalar`]. `f64` is used for
//! analysis sweeps and optimisation; [`Exact`] (arbitrary precision rationals)
//! is used to check algebraic identities with zero residual. Any finite `f64`
//! is a dyadic rational, so conversion into [`Exact`] is lossless.
//! [`Extended`] (double-double, about 32 digits) serves structures with
//! transcendental formulas, whose small-scale defects sink below `f64`
//! rounding.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

/// Arbitrary precision rational numbers.
pub type Exact = BigRational;

/// Double-double floating point.
pub type Extended = TwoFloat;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    /// Lossless for [`Exact`]; panics on non-finite input there.
    fn from_f64(v: f64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;

    /// Picks the representation matching the backend from a precomputed pair.
    fn from_pair(exact: &BigRational, approx: f64) -> Self;

    /// `num / den`, with `approx` its nearest `f64`.
    fn from_fraction(num: i128, den: i128, approx: f64) -> Self {
        let _ = (num, den);
        Self::from_f64(approx)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `self^k` for small non-negative `k`.
    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_pair(_exact: &BigRational, approx: f64) -> Self {
        approx
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).expect("non-finite value cannot be represented exactly")
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_pair(exact: &BigRational, _approx: f64) -> Self {
        exact.clone()
    }
    fn from_fraction(num: i128, den: i128, _approx: f64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for TwoFloat {
    const EXACT: bool = false;

    fn zero() -> Self {
        TwoFloat::from(0.0)
    }
    fn one() -> Self {
        TwoFloat::from(1.0)
    }
    fn from_f64(v: f64) -> Self {
        TwoFloat::from(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        TwoFloat::from(num) / TwoFloat::from(den)
    }
    fn from_rational(r: &BigRational) -> Self {
        let hi = rational_to_f64(r);
        let rest = r - <BigRational as FromPrimitive>::from_f64(hi).unwrap_or_else(Zero::zero);
        TwoFloat::new_add(hi, rational_to_f64(&rest))
    }
    fn to_f64(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
    fn from_pair(exact: &BigRational, _approx: f64) -> Self {
        Self::from_rational(exact)
    }
    fn from_fraction(num: i128, den: i128, _approx: f64) -> Self {
        Self::from_rational(&BigRational::new(num.into(), den.into()))
    }
}

/// Scalars with the transcendental functions needed by chart structures.
pub trait Real: Scalar + Copy {
    /// Relative rounding error of the arithmetic.
    const UNIT_ROUNDOFF: f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

impl Real for TwoFloat {
    // twofloat's sin and cos are accurate to about 1e-21 only; that bounds
    // the chart field, not the arithmetic
    const UNIT_ROUNDOFF: f64 = 1.0 / (1u128 << 104) as f64;

    fn sin(self) -> Self {
        TwoFloat::sin(self)
    }
    fn cos(self) -> Self {
        TwoFloat::cos(self)
    }
}

/// Correctly handles numerators/denominators beyond the `f64` range by
/// shifting both to a common bit length before dividing.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || Zero::is_zero(r)) {
            return v;
        }
    }
    let numer = r.numer();
    let denom = r.denom();
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (numer >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (denom >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// Euclidean norm of a difference, computed exactly before rounding.
pub fn coord_distance<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x.clone() - y.clone()).to_f64();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trips_exactly() {
        for v in [0.1, -3.75, 1e-300, 2f64.powi(-60), 123456.789] {
            let e = <Exact as Scalar>::from_f64(v);
            assert_eq!(Scalar::to_f64(&e), v);
        }
    }

    #[test]
    fn huge_rationals_convert() {
        let tiny = <Exact as Scalar>::from_f64(2f64.powi(-500));
        let big = tiny.clone() * tiny;
        let v = Scalar::to_f64(&big);
        assert_eq!(v, 0.0f64.max(2f64.powi(-1000)));
        let ratio = Exact::new(BigInt::from(3) << 2000usize, BigInt::from(1) << 2000usize);
        assert_eq!(Scalar::to_f64(&ratio), 3.0);
    }

    #[test]
    fn extended_keeps_what_f64_rounds_away() {
        let a = <Extended as Scalar>::from_f64(1.0) + <Extended as Scalar>::from_f64(1e-25);
        let b = <Extended as Scalar>::one();
        assert!((coord_distance(&[a], &[b]) - 1e-25).abs() < 1e-40);
        let third = <Extended as Scalar>::from_rational(&BigRational::new(1.into(), 3.into()));
        let err = third * TwoFloat::from(3.0) - TwoFloat::from(1.0);
        assert!(Scalar::to_f64(&err).abs() < 1e-30);
    }

    #[test]
    fn exact_difference_before_rounding() {
        let a = vec![<Exact as Scalar>::from_f64(1.0) + <Exact as Scalar>::from_f64(1e-30)];
        let b = vec![<Exact as Scalar>::from_ratio(1, 1)];
        assert!((coord_distance(&a, &b) - 1e-30).abs() < 1e-44);
    }
}
