//! Operations induced by a dilatation structure: approximate sum, difference
//! and inverse, rescaled distances, tangent estimates, shifted structures and
//! the pointwise linearity defects.

use std::sync::Arc;

use crate::analysis::fit::{fit_order, OrderFit};
use crate::error::{Error, Result};
use crate::scalar::{coord_distance, Scalar};
use crate::scale::{Scale, ScaleGrid, ScaleGroup};
use crate::structure::{DilatationStructure, Point, Radii};

/// Relative slack on domain-radius comparisons.
const RADIUS_SLACK: f64 = 1e-12;

/// Ratio below which an estimated tangent distance counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Cauchy differences below this are treated as converged.
pub const CAUCHY_FLOOR: f64 = 1e-10;

fn check_dim<S: Scalar>(expected: usize, p: &Point<S>) -> Result<()> {
    if p.dim() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found: p.dim() })
    }
}

fn check_scale(group: ScaleGroup, eps: &Scale) -> Result<()> {
    if group == ScaleGroup::Dyadic && eps.dyadic_exponent().is_none() {
        return Err(Error::InvalidScale(format!("{} is not a dyadic scale", eps.value())));
    }
    Ok(())
}

/// `δ^x_ε y`, with the domain checks of the structure.
///
/// For `ν(ε) <= 1` the argument must lie in `B(x, A)`; for `ν(ε) > 1` it must
/// satisfy `ν(ε) d(x, y) <= B`, i.e. expanding dilations are only used as
/// inverses of contracting ones.
pub fn dilate<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    eps: Scale,
    y: &Point<S>,
) -> Result<Point<S>> {
    check_dim(s.dim(), x)?;
    check_dim(s.dim(), y)?;
    check_scale(s.scale_group(), &eps)?;
    if eps.is_one() {
        return Ok(y.clone());
    }
    let Radii { a, b } = s.radii();
    let d = s.distance(x, y);
    if eps.is_contracting() {
        if !(d <= a * (1.0 + RADIUS_SLACK)) {
            return Err(Error::OutOfDomain { distance: d, radius: a });
        }
    } else if !(d * eps.value() <= b * (1.0 + RADIUS_SLACK)) {
        return Err(Error::OutOfDomain { distance: d, radius: b / eps.value() });
    }
    s.apply_dilation(x, &eps, y)
}

/// `Δ^x_ε(u, v) = δ^{δ^x_ε u}_{ε⁻¹} δ^x_ε v`.
pub fn diff_op<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    eps: Scale,
    u: &Point<S>,
    v: &Point<S>,
) -> Result<Point<S>> {
    let base = dilate(s, x, eps, u)?;
    let moved = dilate(s, x, eps, v)?;
    dilate(s, &base, eps.inv(), &moved)
}

/// `Σ^x_ε(u, v) = δ^x_{ε⁻¹} δ^{δ^x_ε u}_ε v`.
pub fn sum_op<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    eps: Scale,
    u: &Point<S>,
    v: &Point<S>,
) -> Result<Point<S>> {
    let base = dilate(s, x, eps, u)?;
    let moved = dilate(s, &base, eps, v)?;
    dilate(s, x, eps.inv(), &moved)
}

/// `inv^x_ε(u) = δ^{δ^x_ε u}_{ε⁻¹} x`.
pub fn inv_op<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    eps: Scale,
    u: &Point<S>,
) -> Result<Point<S>> {
    let base = dilate(s, x, eps, u)?;
    dilate(s, &base, eps.inv(), x)
}

/// The rescaled distance `(δ^x, μ)(u, v) = d(δ^x_μ u, δ^x_μ v) / μ`.
pub fn relative_dist<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    mu: Scale,
    u: &Point<S>,
    v: &Point<S>,
) -> Result<f64> {
    if !mu.is_contracting() {
        return Err(Error::InvalidScale(format!("relative distance needs ν(μ) <= 1, got {}", mu.value())));
    }
    let du = dilate(s, x, mu, u)?;
    let dv = dilate(s, x, mu, v)?;
    Ok(s.distance(&du, &dv) / mu.value())
}

/// A limit estimate: the value at the smallest grid scale together with the
/// fitted convergence order of the per-scale defects.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Defect sequence the order was fitted on, paired with `scales`.
    pub defects: Vec<f64>,
    pub scales: Vec<f64>,
    /// `None` when every defect sits at the floating-point noise floor.
    pub order: Option<f64>,
    pub residual: Option<f64>,
    pub degenerate: bool,
    /// Coordinate distance to the closed-form limit, when the structure has one.
    pub reference_gap: Option<f64>,
}

fn fitted(scales: &[f64], defects: &[f64]) -> Result<Option<OrderFit>> {
    let samples: Vec<(f64, f64)> = scales.iter().copied().zip(defects.iter().copied()).collect();
    match fit_order(&samples) {
        Ok(fit) => Ok(Some(fit)),
        Err(Error::NoiseFloor) | Err(Error::InsufficientSamples(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Estimates `d^x(u, v)` as the rescaled distance at the smallest grid scale.
pub fn tangent_dist<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    grid: &ScaleGrid,
) -> Result<Estimate<f64>> {
    grid.validate()?;
    let scales = grid.scales();
    let values = scales
        .iter()
        .map(|mu| relative_dist(s, x, *mu, u, v))
        .collect::<Result<Vec<_>>>()?;
    let value = *values.last().expect("grid is non-empty");
    let n = values.len() - 1;
    let defects: Vec<f64> = values[..n].iter().map(|r| (r - value).abs()).collect();
    let grid_values: Vec<f64> = scales[..n].iter().map(Scale::value).collect();
    let fit = fitted(&grid_values, &defects)?;
    let d = s.distance(u, v);
    Ok(Estimate {
        value,
        order: fit.map(|f| f.order),
        residual: fit.map(|f| f.residual),
        defects,
        scales: grid_values,
        degenerate: d > 0.0 && value < DEGENERACY_TOLERANCE * d,
        reference_gap: s.tangent_distance(x, u, v).map(|r| (r - value).abs()),
    })
}

fn cauchy_estimate<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    grid: &ScaleGrid,
    op: impl Fn(Scale) -> Result<Point<S>>,
    reference: Option<Point<S>>,
    label: &str,
) -> Result<Estimate<Point<S>>> {
    grid.validate()?;
    let scales = grid.scales();
    let values = scales.iter().map(|eps| op(*eps)).collect::<Result<Vec<_>>>()?;
    let cauchy: Vec<f64> = values.windows(2).map(|w| s.distance(&w[0], &w[1])).collect();
    let grid_values: Vec<f64> = scales[..cauchy.len()].iter().map(Scale::value).collect();
    let tail = &cauchy[cauchy.len() / 2..];
    let monotone = tail
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) || w[1] <= CAUCHY_FLOOR);
    if !monotone {
        return Err(Error::NoConvergence(format!(
            "{label}: Cauchy differences do not decrease over the last half of the grid"
        )));
    }
    let fit = fitted(&grid_values, &cauchy)?;
    let value = values.last().expect("grid is non-empty").clone();
    let reference_gap = reference.map(|r| coord_distance(&r, &value));
    Ok(Estimate {
        value,
        order: fit.map(|f| f.order),
        residual: fit.map(|f| f.residual),
        defects: cauchy,
        scales: grid_values,
        degenerate: false,
        reference_gap,
    })
}

/// Estimates the tangent sum `Σ^x(u, v)`.
pub fn tangent_sum<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    grid: &ScaleGrid,
) -> Result<Estimate<Point<S>>> {
    cauchy_estimate(s, grid, |e| sum_op(s, x, e, u, v), s.tangent_sum(x, u, v), "tangent_sum")
}

/// Estimates the tangent difference `Δ^x(u, v)`.
pub fn tangent_diff<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    grid: &ScaleGrid,
) -> Result<Estimate<Point<S>>> {
    cauchy_estimate(s, grid, |e| diff_op(s, x, e, u, v), s.tangent_diff(x, u, v), "tangent_diff")
}

/// Estimates the tangent inverse `inv^x(u)`.
pub fn tangent_inv<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    grid: &ScaleGrid,
) -> Result<Estimate<Point<S>>> {
    cauchy_estimate(s, grid, |e| inv_op(s, x, e, u), s.tangent_inv(x, u), "tangent_inv")
}

/// `Lin(x, y, z; ε, μ) = d(δ^x_ε δ^y_μ z, δ^{δ^x_ε y}_μ δ^x_ε z)`.
pub fn lin_defect<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    y: &Point<S>,
    z: &Point<S>,
    eps: Scale,
    mu: Scale,
) -> Result<f64> {
    if !eps.is_contracting() || !mu.is_contracting() {
        return Err(Error::InvalidScale("Lin needs ν(ε), ν(μ) in (0, 1]".into()));
    }
    let left = dilate(s, x, eps, &dilate(s, y, mu, z)?)?;
    let right = dilate(s, &dilate(s, x, eps, y)?, mu, &dilate(s, x, eps, z)?)?;
    Ok(s.distance(&left, &right))
}

/// `d_T(A δ^x_ε y, δ^{A x}_ε A y)`; identically zero for linear maps.
pub fn linear_map_defect<S, D, T>(
    s: &D,
    t: &T,
    map: &dyn Fn(&Point<S>) -> Point<S>,
    x: &Point<S>,
    eps: Scale,
    y: &Point<S>,
) -> Result<f64>
where
    S: Scalar,
    D: DilatationStructure<S> + ?Sized,
    T: DilatationStructure<S> + ?Sized,
{
    let left = map(&dilate(s, x, eps, y)?);
    let right = dilate(t, &map(x), eps, &map(y))?;
    Ok(t.distance(&left, &right))
}

/// `d(Σ^x_ε(u, v), Δ^u_ε(x, v))`; zero on linear structures.
pub fn sum_diff_swap_defect<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    eps: Scale,
) -> Result<f64> {
    let sum = sum_op(s, x, eps, u, v)?;
    let diff = diff_op(s, u, eps, x, v)?;
    Ok(s.distance(&sum, &diff))
}

/// The structure seen through the rescaled distance `(δ^x, μ)` with
/// dilations `δ̂^u_ε v = δ^x_{μ⁻¹} δ^{δ^x_μ u}_ε δ^x_μ v`.
pub struct ShiftedStructure<S: Scalar = f64> {
    base: Arc<dyn DilatationStructure<S>>,
    x: Point<S>,
    mu: Scale,
}

/// Builds the shifted structure of `base` at `x` with scale `μ`.
pub fn shifted_structure<S: Scalar>(
    base: Arc<dyn DilatationStructure<S>>,
    x: Point<S>,
    mu: Scale,
) -> Result<ShiftedStructure<S>> {
    check_dim(base.dim(), &x)?;
    check_scale(base.scale_group(), &mu)?;
    if !mu.is_contracting() {
        return Err(Error::InvalidScale(format!("shift needs ν(μ) <= 1, got {}", mu.value())));
    }
    Ok(ShiftedStructure { base, x, mu })
}

impl<S: Scalar> ShiftedStructure<S> {
    pub fn base_point(&self) -> &Point<S> {
        &self.x
    }

    pub fn mu(&self) -> Scale {
        self.mu
    }
}

impl<S: Scalar> DilatationStructure<S> for ShiftedStructure<S> {
    fn name(&self) -> String {
        format!("shift:{}:{}", self.mu.value(), self.base.name())
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn scale_group(&self) -> ScaleGroup {
        self.base.scale_group()
    }

    fn radii(&self) -> Radii {
        self.base.radii()
    }

    fn distance(&self, u: &Point<S>, v: &Point<S>) -> f64 {
        relative_dist(self.base.as_ref(), &self.x, self.mu, u, v).unwrap_or(f64::INFINITY)
    }

    fn apply_dilation(&self, u: &Point<S>, eps: &Scale, v: &Point<S>) -> Result<Point<S>> {
        let b = self.base.as_ref();
        let base_u = dilate(b, &self.x, self.mu, u)?;
        let base_v = dilate(b, &self.x, self.mu, v)?;
        let moved = dilate(b, &base_u, *eps, &base_v)?;
        dilate(b, &self.x, self.mu.inv(), &moved)
    }

    fn tangent_distance(&self, u: &Point<S>, v: &Point<S>, w: &Point<S>) -> Option<f64> {
        let b = self.base.as_ref();
        let base_u = dilate(b, &self.x, self.mu, u).ok()?;
        let p = diff_op(b, &self.x, self.mu, u, v).ok()?;
        let q = diff_op(b, &self.x, self.mu, u, w).ok()?;
        b.tangent_distance(&base_u, &p, &q)
    }
}
