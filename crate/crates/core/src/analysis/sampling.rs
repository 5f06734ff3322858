//! Seeded sampling of points and scales.
//!
//! All draws come from one `ChaCha8Rng` stream in a fixed order, so a seed
//! determines every sample regardless of how evaluation is later scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scale::{Scale, ScaleGroup};
use crate::structure::{sample_in_ball, DilatationStructure, Point};

/// Sample radius as a fraction of the domain radius `A`.
pub const RADIUS_FRACTION: f64 = 0.2;

/// Radius used when `A` is infinite.
pub const UNBOUNDED_RADIUS: f64 = 0.4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `0.2 A`, or [`UNBOUNDED_RADIUS`] for global structures.
pub fn default_radius<S: Scalar, D: DilatationStructure<S> + ?Sized>(s: &D) -> f64 {
    let a = s.radii().a;
    if a.is_finite() {
        RADIUS_FRACTION * a
    } else {
        UNBOUNDED_RADIUS
    }
}

/// Rejects radii larger than `0.2 A`.
pub fn check_radius<S: Scalar, D: DilatationStructure<S> + ?Sized>(s: &D, radius: f64) -> Result<()> {
    let a = s.radii().a;
    let limit = if a.is_finite() { RADIUS_FRACTION * a } else { f64::INFINITY };
    if !(radius > 0.0 && radius <= limit * (1.0 + 1e-12)) {
        return Err(Error::InvalidScale(format!("sample radius {radius} must lie in (0, {limit}]")));
    }
    Ok(())
}

/// Coordinates of sampled points are multiples of `2^-QUANTUM_BITS`, which
/// keeps rational-mode denominators small through nested group products.
pub const QUANTUM_BITS: i32 = 16;

fn quantize<S: Scalar>(p: &Point<S>) -> Point<S> {
    let q = f64::powi(2.0, QUANTUM_BITS);
    Point::from_f64(&p.to_f64().iter().map(|c| (c * q).round() / q).collect::<Vec<_>>())
}

pub fn point<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    center: &Point<S>,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Point<S>> {
    sample_in_ball(s, center, radius, rng)
        .map(|p| quantize(&p))
        .ok_or_else(|| Error::InsufficientSamples(format!("no point accepted in the ball of radius {radius}")))
}

pub fn points<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    center: &Point<S>,
    radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point<S>>> {
    (0..count).map(|_| point(s, center, radius, rng)).collect()
}

/// A contracting scale: `k/1024` with `k` uniform in `52..=973` (about
/// `0.05..0.95`) on continuous groups, `2^{-k}` with `k` in `1..=5` on
/// dyadic ones. Fractions with small denominators keep rational-mode
/// arithmetic cheap.
pub fn contracting_scale(group: ScaleGroup, rng: &mut ChaCha8Rng) -> Scale {
    match group {
        ScaleGroup::Continuous => Scale::ratio(rng.gen_range(52..=973), 1024).expect("positive"),
        ScaleGroup::Dyadic => Scale::dyadic(-rng.gen_range(1..=5)),
    }
}
