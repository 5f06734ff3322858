//! Exact identities that every dilatation structure satisfies.
//!
//! Residuals are coordinate distances, so they are exactly zero in rational
//! mode and at rounding level in floating point, independent of how badly the
//! metric of the structure amplifies rounding (the Korányi distance between
//! two points that agree to `1e-16` is about `1e-8`).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ops::{diff_op, dilate, inv_op, relative_dist, sum_op};
use crate::scalar::{coord_distance, Scalar};
use crate::scale::Scale;
use crate::structure::{DilatationStructure, Point};

use super::sampling;

/// Names of the checked identities, in report order.
pub const IDENTITIES: [&str; 13] = [
    "a1-fixed-point",
    "a1-unit-scale",
    "a2-composition",
    "a0-inverse",
    "sum-at-base",
    "diff-inverts-sum",
    "sum-inverts-diff",
    "inverse-shifted-involution",
    "sum-shifted-associativity",
    "diff-as-sum",
    "diff-dilation-equivariance",
    "shift-isometry",
    "shift-fixes-base",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub structure: String,
    pub seed: u64,
    pub samples: usize,
    pub skipped: usize,
    pub tolerance: f64,
    /// Largest residual per identity.
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |a, &b| a.max(b))
    }
}

struct Draw<S: Scalar> {
    x: Point<S>,
    u: Point<S>,
    v: Point<S>,
    w: Point<S>,
    eps: Scale,
    mu: Scale,
}

fn residuals<S: Scalar, D: DilatationStructure<S> + ?Sized>(s: &D, d: &Draw<S>) -> Result<[f64; 13]> {
    let Draw { x, u, v, w, eps, mu } = d;
    let (eps, mu) = (*eps, *mu);
    let gap = |a: &Point<S>, b: &Point<S>| coord_distance(a, b);

    // bypass the unit-scale shortcut of `dilate` for A1
    let one = s.scale_group().one();
    let a1_unit = gap(&s.apply_dilation(x, &one, u)?, u);
    let a1_fixed = gap(&dilate(s, x, eps, x)?, x);
    let a2 = gap(&dilate(s, x, eps, &dilate(s, x, mu, u)?)?, &dilate(s, x, eps.mul(&mu), u)?);
    let a0 = gap(&dilate(s, x, eps.inv(), &dilate(s, x, eps, u)?)?, u);

    let base = dilate(s, x, eps, u)?;
    let sum_base = gap(&sum_op(s, x, eps, x, u)?, u);
    let diff_sum = gap(&diff_op(s, x, eps, u, &sum_op(s, x, eps, u, v)?)?, v);
    let sum_diff = gap(&sum_op(s, x, eps, u, &diff_op(s, x, eps, u, v)?)?, v);
    let involution = gap(&inv_op(s, &base, eps, &inv_op(s, x, eps, u)?)?, u);
    let assoc = gap(
        &sum_op(s, x, eps, u, &sum_op(s, &base, eps, v, w)?)?,
        &sum_op(s, x, eps, &sum_op(s, x, eps, u, v)?, w)?,
    );
    let diff_as_sum = gap(&diff_op(s, x, eps, u, v)?, &sum_op(s, &base, eps, &inv_op(s, x, eps, u)?, v)?);
    let em = eps.mul(&mu);
    let equivariance = gap(
        &diff_op(s, x, eps, &dilate(s, x, mu, u)?, &dilate(s, x, mu, v)?)?,
        &dilate(s, &dilate(s, x, em, u)?, mu, &diff_op(s, x, em, u, v)?)?,
    );

    // Σ^x_μ(u, ·) is an isometry from (δ^{δ^x_μ u}, μ) to (δ^x, μ)
    let shifted_base = dilate(s, x, mu, u)?;
    let a = dilate(s, &shifted_base, mu.inv(), &dilate(s, x, mu, v)?)?;
    let b = dilate(s, &shifted_base, mu.inv(), &dilate(s, x, mu, w)?)?;
    let isometry = (relative_dist(s, x, mu, &sum_op(s, x, mu, u, &a)?, &sum_op(s, x, mu, u, &b)?)?
        - relative_dist(s, &shifted_base, mu, &a, &b)?)
        .abs();
    let fixes = gap(&sum_op(s, x, mu, u, &shifted_base)?, u);

    Ok([
        a1_fixed,
        a1_unit,
        a2,
        a0,
        sum_base,
        diff_sum,
        sum_diff,
        involution,
        assoc,
        diff_as_sum,
        equivariance,
        isometry,
        fixes,
    ])
}

/// Samples `count` tuples `(x, u, v, w, ε, μ)` with `x` in the ball of
/// `radius` about `center` and `u, v, w` in the ball of `radius` about `x`,
/// and records the largest residual of each identity.
pub fn identity_suite<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    center: &[f64],
    radius: Option<f64>,
    seed: u64,
    count: usize,
    tolerance: f64,
) -> Result<IdentityReport> {
    let radius = radius.unwrap_or_else(|| sampling::default_radius(s));
    sampling::check_radius(s, radius)?;
    let c: Point<S> = Point::from_f64(center);
    let mut rng = sampling::rng(seed);
    let group = s.scale_group();
    let draws: Vec<Draw<S>> = (0..count)
        .map(|_| {
            let x = sampling::point(s, &c, radius, &mut rng)?;
            let u = sampling::point(s, &x, radius, &mut rng)?;
            let v = sampling::point(s, &x, radius, &mut rng)?;
            let w = sampling::point(s, &x, radius, &mut rng)?;
            let eps = sampling::contracting_scale(group, &mut rng);
            let mu = sampling::contracting_scale(group, &mut rng);
            Ok(Draw { x, u, v, w, eps, mu })
        })
        .collect::<Result<_>>()?;
    let results: Vec<Result<[f64; 13]>> = draws.par_iter().map(|d| residuals(s, d)).collect();
    let mut worst = [0.0f64; 13];
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(row) => {
                for (m, v) in worst.iter_mut().zip(row) {
                    *m = if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) };
                }
            }
            Err(_) => skipped += 1,
        }
    }
    let residuals: BTreeMap<String, f64> = IDENTITIES.iter().map(|n| n.to_string()).zip(worst).collect();
    let pass = skipped < count && worst.iter().all(|r| *r <= tolerance);
    Ok(IdentityReport { structure: s.name(), seed, samples: count, skipped, tolerance, residuals, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conical::{as_dilatation_structure, NormedGroupWithDilatations};
    use crate::euclidean::{AffineStructure, ChartPerturbedStructure};
    use crate::nilpotent::{builtin, NormVariant};
    use crate::scalar::Exact;

    #[test]
    fn euclidean_identities() {
        let r = identity_suite::<f64, _>(&AffineStructure::new(2), &[0.0, 0.0], None, 1, 200, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        let r = identity_suite::<Exact, _>(&AffineStructure::new(2), &[0.0, 0.0], None, 1, 50, 0.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn heisenberg_identities_are_exact_in_rationals() {
        let g = NormedGroupWithDilatations::carnot("h", builtin("heisenberg:1").unwrap(), NormVariant::Koranyi).unwrap();
        let s = as_dilatation_structure(g);
        let r = identity_suite::<Exact, _>(&s, &[0.0; 3], None, 3, 30, 0.0).unwrap();
        assert_eq!(r.skipped, 0);
        for (name, v) in &r.residuals {
            // the isometry compares two metric values computed in f64
            if name != "shift-isometry" {
                assert_eq!(*v, 0.0, "{name}");
            }
        }
    }

    #[test]
    fn chart_identities() {
        let r = identity_suite::<f64, _>(&ChartPerturbedStructure::default_plane(), &[0.1, 0.2], None, 5, 100, 1e-10)
            .unwrap();
        assert!(r.pass, "{r:?}");
    }
}
