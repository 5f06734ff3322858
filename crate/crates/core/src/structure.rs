//! The dilatation-structure contract.

use std::ops::Deref;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::scale::{Scale, ScaleGroup};

/// A point of the underlying space, in the coordinates of its structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<S = f64>(pub Vec<S>);

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![S::zero(); dim])
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&c| S::from_f64(c)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> Deref for Point<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> From<Vec<S>> for Point<S> {
    fn from(v: Vec<S>) -> Self {
        Point(v)
    }
}

/// Domain radii: `U(x)` is the closed ball of radius `a`, and dilations with
/// valuation above one map into the ball of radius `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    pub a: f64,
    pub b: f64,
}

impl Default for Radii {
    fn default() -> Self {
        Radii { a: 2.0, b: 1.5 }
    }
}

/// A metric space with base-pointed dilations `δ^x_ε`.
///
/// Implementors provide the raw dilation map; domain checks live in
/// [`crate::ops::dilate`], which every composite operation goes through.
pub trait DilatationStructure<S: Scalar = f64>: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn scale_group(&self) -> ScaleGroup {
        ScaleGroup::Continuous
    }

    fn radii(&self) -> Radii {
        Radii::default()
    }

    fn distance(&self, u: &Point<S>, v: &Point<S>) -> f64;

    /// `δ^x_ε y` without domain checks.
    fn apply_dilation(&self, x: &Point<S>, eps: &Scale, y: &Point<S>) -> Result<Point<S>>;

    /// Closed-form tangent distance `d^x(u, v)`, when known.
    fn tangent_distance(&self, _x: &Point<S>, _u: &Point<S>, _v: &Point<S>) -> Option<f64> {
        None
    }

    /// Closed-form `Σ^x(u, v)`, when known.
    fn tangent_sum(&self, _x: &Point<S>, _u: &Point<S>, _v: &Point<S>) -> Option<Point<S>> {
        None
    }

    /// Closed-form `Δ^x(u, v)`, when known.
    fn tangent_diff(&self, _x: &Point<S>, _u: &Point<S>, _v: &Point<S>) -> Option<Point<S>> {
        None
    }

    /// Closed-form `inv^x(u)`, when known.
    fn tangent_inv(&self, _x: &Point<S>, _u: &Point<S>) -> Option<Point<S>> {
        None
    }

    /// One rejection-sampling draw from the closed ball `B(center, radius)`.
    ///
    /// The default proposal is the coordinate box of half-width `radius`,
    /// which contains the ball whenever `d` dominates the max-coordinate
    /// distance. Returns `None` when the proposal falls outside the ball.
    fn propose_in_ball(&self, center: &Point<S>, radius: f64, rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        let candidate: Point<S> = Point(
            center
                .iter()
                .map(|c| c.clone() + S::from_f64(rng.gen_range(-radius..=radius)))
                .collect(),
        );
        (self.distance(center, &candidate) <= radius).then_some(candidate)
    }
}

/// Draws a point uniformly (up to the proposal) from `B(center, radius)`.
pub fn sample_in_ball<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    center: &Point<S>,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Point<S>> {
    (0..10_000).find_map(|_| s.propose_in_ball(center, radius, rng))
}
