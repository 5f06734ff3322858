//! The scale group and its valuation.
//!
//! Only the valuation of a scale ever enters a computation, so a [`Scale`] is
//! stored as its positive value together with the group it belongs to. A
//! scale also remembers its value as an exact fraction while that fits in
//! `i128`, so that rational-mode computations see exactly `1/ε` and `εμ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleGroup {
    /// `(0, +inf)` under multiplication.
    Continuous,
    /// `{2^k : k integer}`.
    Dyadic,
}

impl ScaleGroup {
    pub fn one(self) -> Scale {
        Scale { value: 1.0, group: self, exact: Some((1, 1)) }
    }

    /// Whether a positive value is an element of this group.
    pub fn contains(self, value: f64) -> bool {
        match self {
            ScaleGroup::Continuous => value.is_finite() && value > 0.0,
            ScaleGroup::Dyadic => dyadic_exponent(value).is_some(),
        }
    }
}

fn dyadic_exponent(value: f64) -> Option<i32> {
    if !(value.is_finite() && value > 0.0) {
        return None;
    }
    let k = value.log2().round() as i32;
    (2f64.powi(k) == value).then_some(k)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn reduced(num: i128, den: i128) -> (i128, i128) {
    let g = gcd(num, den);
    (num / g, den / g)
}

/// The exact fraction of a finite positive `f64`, if it fits.
fn f64_fraction(value: f64) -> Option<(i128, i128)> {
    if !(value.is_finite() && value > 0.0) {
        return None;
    }
    let bits = value.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    let shift = exp - 1075;
    let m = mantissa as i128;
    if shift >= 0 {
        (shift < 70).then(|| (m << shift, 1))
    } else {
        (-shift < 126).then(|| reduced(m, 1i128 << -shift))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    value: f64,
    group: ScaleGroup,
    #[serde(skip)]
    exact: Option<(i128, i128)>,
}

impl Scale {
    pub fn continuous(value: f64) -> Result<Self> {
        Self::in_group(ScaleGroup::Continuous, value)
    }

    /// The dyadic scale `2^k`.
    pub fn dyadic(k: i32) -> Self {
        let value = 2f64.powi(k);
        Scale { value, group: ScaleGroup::Dyadic, exact: f64_fraction(value) }
    }

    /// The continuous scale `num / den`, kept exact.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if num <= 0 || den <= 0 {
            return Err(Error::InvalidScale(format!("{num}/{den} is not positive")));
        }
        let mut s = Self::continuous(num as f64 / den as f64)?;
        s.exact = Some(reduced(num as i128, den as i128));
        Ok(s)
    }

    pub fn in_group(group: ScaleGroup, value: f64) -> Result<Self> {
        if group.contains(value) {
            Ok(Scale { value, group, exact: f64_fraction(value) })
        } else {
            Err(Error::InvalidScale(format!("{value} is not an element of the {group:?} scale group")))
        }
    }

    /// The valuation of the scale.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn group(&self) -> ScaleGroup {
        self.group
    }

    /// `Some(k)` when the valuation is exactly `2^k`, whatever the group tag.
    pub fn dyadic_exponent(&self) -> Option<i32> {
        dyadic_exponent(self.value)
    }

    /// `(numerator, denominator)` in lowest terms, when representable.
    pub fn fraction(&self) -> Option<(i128, i128)> {
        self.exact
    }

    /// The valuation as a scalar: exact in rational mode, and accurate to the working precision, whenever the
    /// fraction is known.
    pub fn to_scalar<S: crate::scalar::Scalar>(&self) -> S {
        match self.exact {
            Some((n, d)) => S::from_fraction(n, d, self.value),
            None => S::from_f64(self.value),
        }
    }

    pub fn inv(&self) -> Scale {
        Scale { value: 1.0 / self.value, group: self.group, exact: self.exact.map(|(n, d)| (d, n)) }
    }

    pub fn mul(&self, other: &Scale) -> Scale {
        let group = if self.group == other.group { self.group } else { ScaleGroup::Continuous };
        let exact = match (self.exact, other.exact) {
            (Some((a, b)), Some((c, d))) => {
                // cross-reduce first to delay overflow
                let (a, d) = reduced(a, d);
                let (c, b) = reduced(c, b);
                a.checked_mul(c).zip(b.checked_mul(d))
            }
            _ => None,
        };
        Scale { value: self.value * other.value, group, exact }
    }

    pub fn is_one(&self) -> bool {
        self.value == 1.0
    }

    /// Membership in the semigroup of contracting scales.
    pub fn is_contracting(&self) -> bool {
        self.value <= 1.0
    }
}

/// A decreasing geometric sequence of scales `start * ratio^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for ScaleGrid {
    /// `0.5^k` for `k = 1..=16`.
    fn default() -> Self {
        ScaleGrid { start: 0.5, ratio: 0.5, count: 16 }
    }
}

impl ScaleGrid {
    pub fn new(start: f64, ratio: f64, count: usize) -> Result<Self> {
        let grid = ScaleGrid { start, ratio, count };
        grid.validate()?;
        Ok(grid)
    }

    /// `0.5^k` for `k = first..=last`.
    pub fn dyadic(first: i32, last: i32) -> Self {
        ScaleGrid { start: 0.5f64.powi(first), ratio: 0.5, count: (last - first + 1).max(0) as usize }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start < 1.0) {
            return Err(Error::InvalidScale(format!("grid start {} must lie in (0, 1)", self.start)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidScale(format!("grid ratio {} must lie in (0, 1)", self.ratio)));
        }
        if self.count == 0 {
            return Err(Error::InvalidScale("grid must contain at least one scale".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.start * self.ratio.powi(k as i32)).collect()
    }

    pub fn scales(&self) -> Vec<Scale> {
        let dyadic = self.start.log2().fract() == 0.0 && self.ratio == 0.5;
        let group = if dyadic { ScaleGroup::Dyadic } else { ScaleGroup::Continuous };
        self.values().into_iter().map(|value| Scale { value, group, exact: f64_fraction(value) }).collect()
    }

    pub fn smallest(&self) -> Scale {
        *self.scales().last().expect("grid is non-empty")
    }
}

impl std::str::FromStr for ScaleGrid {
    type Err = Error;

    /// `start:ratio:count`, e.g. `0.5:0.5:16`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid '{s}' must have the form start:ratio:count")));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{p}: {e}")));
        let count = parts[2].trim().parse::<usize>().map_err(|e| Error::Parse(format!("{}: {e}", parts[2])))?;
        ScaleGrid::new(num(parts[0])?, num(parts[1])?, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dyadic_membership() {
        assert!(ScaleGroup::Dyadic.contains(0.125));
        assert!(ScaleGroup::Dyadic.contains(4.0));
        assert!(!ScaleGroup::Dyadic.contains(0.3));
        assert!(Scale::in_group(ScaleGroup::Dyadic, 0.75).is_err());
        assert_eq!(Scale::dyadic(-3).dyadic_exponent(), Some(-3));
    }

    #[test]
    fn non_positive_scales_rejected() {
        assert!(Scale::continuous(0.0).is_err());
        assert!(Scale::continuous(-1.0).is_err());
        assert!(Scale::continuous(f64::NAN).is_err());
    }

    #[test]
    fn default_grid_is_half_powers() {
        let v = ScaleGrid::default().values();
        assert_eq!(v.len(), 16);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[15], 0.5f64.powi(16));
        assert!(ScaleGrid::default().scales().iter().all(|s| s.group() == ScaleGroup::Dyadic));
    }

    #[test]
    fn grid_parsing() {
        let g: ScaleGrid = "0.25:0.5:4".parse().unwrap();
        assert_eq!(g.values(), vec![0.25, 0.125, 0.0625, 0.03125]);
        assert!("1.5:0.5:3".parse::<ScaleGrid>().is_err());
        assert!("0.5:0.5".parse::<ScaleGrid>().is_err());
    }

    #[test]
    fn exact_fractions() {
        assert_eq!(Scale::continuous(0.75).unwrap().fraction(), Some((3, 4)));
        assert_eq!(Scale::continuous(0.75).unwrap().inv().fraction(), Some((4, 3)));
        assert_eq!(Scale::dyadic(-3).fraction(), Some((1, 8)));
        assert_eq!(Scale::dyadic(5).fraction(), Some((32, 1)));
        let third = Scale::ratio(2, 6).unwrap();
        assert_eq!(third.fraction(), Some((1, 3)));
        assert_eq!(third.mul(&Scale::ratio(3, 5).unwrap()).fraction(), Some((1, 5)));
        let e: crate::scalar::Exact = third.inv().to_scalar();
        assert_eq!(e, crate::scalar::Exact::from_integer(3.into()));
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let sa = Scale::continuous(a).unwrap();
            let sb = Scale::continuous(b).unwrap();
            prop_assert_eq!(sa.mul(&sb).value(), a * b);
            prop_assert!((sa.mul(&sa.inv()).value() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn dyadic_products_stay_dyadic(j in -40i32..40, k in -40i32..40) {
            let p = Scale::dyadic(j).mul(&Scale::dyadic(k));
            prop_assert_eq!(p.dyadic_exponent(), Some(j + k));
            prop_assert_eq!(p.group(), ScaleGroup::Dyadic);
        }
    }
}
