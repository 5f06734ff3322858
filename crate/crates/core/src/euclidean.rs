//! Structures on `R^n`: the affine one, where dilations are homotheties, and
//! a chart-perturbed one whose dilations are scalar scalings conjugated by a
//! base-point dependent quadratic chart `ψ_x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::scalar::{Real, Scalar};
use crate::scale::Scale;
use crate::structure::{DilatationStructure, Point, Radii};

fn euclid<S: Scalar>(u: &[S], v: &[S]) -> f64 {
    crate::scalar::coord_distance(u, v)
}

/// `δ^x_ε y = x + ε(-x + y)` on `R^n` with the Euclidean distance.
///
/// The dilations are global, so the domain radii default to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineStructure {
    dim: usize,
    radii: Radii,
}

impl AffineStructure {
    pub fn new(dim: usize) -> Self {
        AffineStructure { dim, radii: Radii { a: f64::INFINITY, b: f64::INFINITY } }
    }

    pub fn with_radii(dim: usize, radii: Radii) -> Self {
        AffineStructure { dim, radii }
    }
}

/// Tangent sum, difference and inverse of the affine structure.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForms<S: Scalar = f64> {
    pub sum: Point<S>,
    pub diff: Point<S>,
    pub inv: Point<S>,
}

/// `Σ^x(u,v) = u - x + v`, `Δ^x(u,v) = x - u + v`, `inv^x(u) = x - u + x`.
pub fn affine_closed_forms<S: Scalar>(x: &[S], u: &[S], v: &[S]) -> AffineForms<S> {
    let zip3 = |f: &dyn Fn(&S, &S, &S) -> S| -> Point<S> {
        Point(x.iter().zip(u).zip(v).map(|((a, b), c)| f(a, b, c)).collect())
    };
    AffineForms {
        sum: zip3(&|x, u, v| u.clone() - x.clone() + v.clone()),
        diff: zip3(&|x, u, v| x.clone() - u.clone() + v.clone()),
        inv: zip3(&|x, u, _| x.clone() - u.clone() + x.clone()),
    }
}

impl<S: Scalar> DilatationStructure<S> for AffineStructure {
    fn name(&self) -> String {
        format!("euclidean:{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn radii(&self) -> Radii {
        self.radii
    }

    fn distance(&self, u: &Point<S>, v: &Point<S>) -> f64 {
        euclid(u, v)
    }

    fn apply_dilation(&self, x: &Point<S>, eps: &Scale, y: &Point<S>) -> Result<Point<S>> {
        let e = eps.to_scalar::<S>();
        Ok(Point(
            x.iter()
                .zip(y.iter())
                .map(|(a, b)| a.clone() + e.clone() * (b.clone() - a.clone()))
                .collect(),
        ))
    }

    fn tangent_distance(&self, _x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<f64> {
        Some(euclid(u, v))
    }

    fn tangent_sum(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        Some(affine_closed_forms(x, u, v).sum)
    }

    fn tangent_diff(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        Some(affine_closed_forms(x, u, v).diff)
    }

    fn tangent_inv(&self, x: &Point<S>, u: &Point<S>) -> Option<Point<S>> {
        Some(affine_closed_forms(x, u, u).inv)
    }
}

/// The scalar factor `s(x)` multiplying the quadratic chart term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    /// `sin(x₁) + cos(2 x₂)` (with `x₂ = x₁` in dimension one).
    SinCos,
}

impl ScalarField {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        match *self {
            ScalarField::Constant(c) => S::from_f64(c),
            ScalarField::SinCos => {
                let x2 = if x.len() > 1 { x[1] } else { x[0] };
                x[0].sin() + (S::from_f64(2.0) * x2).cos()
            }
        }
    }

    fn bound(&self) -> f64 {
        match *self {
            ScalarField::Constant(c) => c.abs(),
            ScalarField::SinCos => 2.0,
        }
    }
}

const MAX_NEWTON_STEPS: usize = 100;

/// `δ^x_ε y = ψ_x⁻¹(ε ψ_x(y))` with `ψ_x(y) = (y - x) + η s(x) C[y - x, y - x]`.
///
/// `C` is a symmetric bilinear map normalised so that `|s| ‖C‖ <= 1`; the
/// chart is then a diffeomorphism of `B(x, ρ)` whenever `η ρ < 1/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPerturbedStructure {
    dim: usize,
    /// `c[(i * dim + j) * dim + k]`, symmetric in `j, k`.
    coeffs: Vec<f64>,
    field: ScalarField,
    eta: f64,
    rho: f64,
    name: String,
}

impl ChartPerturbedStructure {
    pub fn new(dim: usize, coeffs: Vec<f64>, field: ScalarField, eta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parse("chart dimension must be positive".into()));
        }
        if coeffs.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, found: coeffs.len() });
        }
        if !(0.0..=0.1).contains(&eta) {
            return Err(Error::Parse(format!("perturbation magnitude {eta} must lie in [0, 0.1]")));
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..j {
                    let a = coeffs[(i * dim + j) * dim + k];
                    let b = coeffs[(i * dim + k) * dim + j];
                    if a != b {
                        return Err(Error::Parse(format!("coefficients not symmetric at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        let norm = bilinear_bound(dim, &coeffs);
        if field.bound() * norm > 1.0 + 1e-12 {
            return Err(Error::Parse(format!(
                "quadratic term too large: |s| ‖C‖ = {} exceeds 1",
                field.bound() * norm
            )));
        }
        let rho = if eta > 0.0 { (0.2 / eta).min(4.0) } else { 4.0 };
        let name = format!("chart:{dim}:custom");
        Ok(ChartPerturbedStructure { dim, coeffs, field, eta, rho, name })
    }

    /// The default negative control: `n = 2`, `η = 0.05`, `s = sin x₁ + cos 2x₂`.
    pub fn default_plane() -> Self {
        let c = [
            // i = 0
            3.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 0.0,
            // i = 1
            0.0, 1.0 / 16.0, 1.0 / 16.0, 3.0 / 16.0,
        ];
        let mut s = Self::new(2, c.to_vec(), ScalarField::SinCos, 0.05).expect("default chart is valid");
        s.name = "chart:2".into();
        s
    }

    /// Coefficients drawn from `{-4..4}/16` by a seeded generator, then
    /// rescaled so that `2 ‖C‖ <= 1`.
    pub fn seeded(dim: usize, eta: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in j..dim {
                    let v = rng.gen_range(-4i32..=4) as f64 / 16.0;
                    c[(i * dim + j) * dim + k] = v;
                    c[(i * dim + k) * dim + j] = v;
                }
            }
        }
        let norm = bilinear_bound(dim, &c);
        if norm > 0.5 {
            let f = 0.5 / norm;
            c.iter_mut().for_each(|v| *v *= f);
        }
        let mut s = Self::new(dim, c, ScalarField::SinCos, eta)?;
        s.name = format!("chart:{dim}:{eta}:{seed}");
        Ok(s)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Radius on which the chart is guaranteed invertible.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn quadratic<S: Real>(&self, f: S, h: &[S]) -> Vec<S> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..n {
                    for k in 0..n {
                        let c = self.coeffs[(i * n + j) * n + k];
                        if c != 0.0 {
                            acc = acc + S::from_f64(c) * h[j] * h[k];
                        }
                    }
                }
                f * acc
            })
            .collect()
    }

    fn field_factor<S: Real>(&self, x: &[S]) -> S {
        S::from_f64(self.eta) * self.field.eval(x)
    }

    /// `ψ_x(y)`; requires `|y - x| <= ρ`.
    pub fn chart_forward<S: Real>(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        let h: Vec<S> = y.iter().zip(x).map(|(a, b)| *a - *b).collect();
        let r = norm(&h);
        if r > self.rho {
            return Err(Error::OutOfDomain { distance: r, radius: self.rho });
        }
        let q = self.quadratic(self.field_factor(x), &h);
        Ok(h.iter().zip(&q).map(|(a, b)| *a + *b).collect())
    }

    /// `ψ_x⁻¹(w)` by Newton iteration; convergence is guaranteed for
    /// `|w| <= ρ/2`. The Jacobian is solved in `f64`, which is enough for
    /// the iteration to converge to the working precision of `S`.
    pub fn chart_inverse<S: Real>(&self, x: &[S], w: &[S]) -> Result<Vec<S>> {
        let n = self.dim;
        let f = self.field_factor(x);
        let ff = f.to_f64();
        let mut h = w.to_vec();
        let scale = 1.0 + norm(w);
        let tol = 2.0 * S::UNIT_ROUNDOFF * scale;
        let mut converged_at = None;
        for it in 0..MAX_NEWTON_STEPS {
            let q = self.quadratic(f, &h);
            let residual: Vec<S> = (0..n).map(|i| h[i] + q[i] - w[i]).collect();
            let r = norm(&residual);
            if !r.is_finite() {
                break;
            }
            if r <= tol {
                converged_at.get_or_insert(it);
            }
            if let Some(c) = converged_at {
                // a couple of polishing steps past the tolerance
                if it >= c + 2 || r == 0.0 {
                    break;
                }
            }
            let mut jac = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += self.coeffs[(i * n + j) * n + k] * h[k].to_f64();
                    }
                    jac[i * n + j] = 2.0 * ff * acc + if i == j { 1.0 } else { 0.0 };
                }
            }
            let rhs: Vec<f64> = residual.iter().map(Scalar::to_f64).collect();
            let step = solve(n, jac, rhs).ok_or(Error::NoInvert { iterations: it })?;
            h.iter_mut().zip(&step).for_each(|(a, b)| *a = *a - S::from_f64(*b));
        }
        let q = self.quadratic(f, &h);
        let r = norm(&(0..n).map(|i| h[i] + q[i] - w[i]).collect::<Vec<_>>());
        if !(r <= 1e3 * tol) || norm(&h) > self.rho {
            return Err(Error::NoInvert { iterations: MAX_NEWTON_STEPS });
        }
        Ok(h.iter().zip(x).map(|(a, b)| *a + *b).collect())
    }
}

fn norm<S: Scalar>(v: &[S]) -> f64 {
    crate::scalar::coord_distance(v, &vec![S::zero(); v.len()])
}

/// Upper bound on the operator norm of a bilinear map: `|C[h, h]| <= bound |h|²`.
fn bilinear_bound(dim: usize, c: &[f64]) -> f64 {
    (0..dim)
        .map(|i| {
            let row: f64 = c[i * dim * dim..(i + 1) * dim * dim].iter().map(|v| v.abs()).sum();
            row * row
        })
        .sum::<f64>()
        .sqrt()
}

impl<S: Real> DilatationStructure<S> for ChartPerturbedStructure {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, u: &Point<S>, v: &Point<S>) -> f64 {
        euclid(u, v)
    }

    fn apply_dilation(&self, x: &Point<S>, eps: &Scale, y: &Point<S>) -> Result<Point<S>> {
        let e: S = eps.to_scalar();
        let w: Vec<S> = self.chart_forward(x, y)?.into_iter().map(|c| c * e).collect();
        self.chart_inverse(x, &w).map(Point)
    }

    fn tangent_distance(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<f64> {
        let pu = self.chart_forward(x, u).ok()?;
        let pv = self.chart_forward(x, v).ok()?;
        Some(euclid(&pu, &pv))
    }

    fn tangent_sum(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let pu = self.chart_forward(x, u).ok()?;
        let pv = self.chart_forward(x, v).ok()?;
        let w: Vec<S> = pu.iter().zip(&pv).map(|(a, b)| *a + *b).collect();
        self.chart_inverse(x, &w).ok().map(Point)
    }

    fn tangent_diff(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let pu = self.chart_forward(x, u).ok()?;
        let pv = self.chart_forward(x, v).ok()?;
        let w: Vec<S> = pu.iter().zip(&pv).map(|(a, b)| *b - *a).collect();
        self.chart_inverse(x, &w).ok().map(Point)
    }

    fn tangent_inv(&self, x: &Point<S>, u: &Point<S>) -> Option<Point<S>> {
        let pu = self.chart_forward(x, u).ok()?;
        let w: Vec<S> = pu.iter().map(|a| -*a).collect();
        self.chart_inverse(x, &w).ok().map(Point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{dilate, lin_defect, tangent_dist, tangent_sum};
    use crate::scale::ScaleGrid;

    #[test]
    fn affine_forms_on_the_line() {
        let f = affine_closed_forms(&[0.0], &[1.0], &[3.0]);
        assert_eq!((f.sum[0], f.diff[0], f.inv[0]), (4.0, 2.0, -1.0));
    }

    #[test]
    fn affine_forms_identity_cases() {
        let f = affine_closed_forms(&[0.5], &[0.5], &[2.0]);
        assert_eq!((f.sum[0], f.diff[0], f.inv[0]), (2.0, 2.0, 0.5));
    }

    #[test]
    fn affine_forms_in_the_plane() {
        let f = affine_closed_forms(&[1.0, 1.0], &[2.0, 1.0], &[1.0, 2.0]);
        assert_eq!(f.sum.0, vec![2.0, 2.0]);
        assert_eq!(f.diff.0, vec![0.0, 2.0]);
        assert_eq!(f.inv.0, vec![0.0, 1.0]);
    }

    #[test]
    fn unperturbed_chart_is_translation() {
        let s = ChartPerturbedStructure::new(2, vec![0.0; 8], ScalarField::SinCos, 0.05).unwrap();
        let x = [0.3, -0.1];
        let y = [0.5, 0.4];
        let w = s.chart_forward(&x, &y).unwrap();
        assert!((w[0] - 0.2).abs() < 1e-16 && (w[1] - 0.5).abs() < 1e-16);
        assert_eq!(s.chart_inverse(&x, &w).unwrap(), vec![0.5, 0.4]);
    }

    #[test]
    fn scalar_quadratic_chart() {
        let s = ChartPerturbedStructure::new(1, vec![1.0], ScalarField::Constant(1.0), 0.1).unwrap();
        let w = s.chart_forward(&[0.0], &[0.1]).unwrap();
        assert!((w[0] - 0.101).abs() < 1e-15);
        // oracle: positive root of 0.1 h² + h - w = 0
        let oracle = (-1.0 + (1.0f64 + 0.4 * w[0]).sqrt()) / 0.2;
        let back = s.chart_inverse(&[0.0], &w).unwrap();
        assert!((back[0] - oracle).abs() < 1e-15);
        assert!((back[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip_on_seeded_samples() {
        let s = ChartPerturbedStructure::default_plane();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let y = [x[0] + rng.gen_range(-1.0..1.0), x[1] + rng.gen_range(-1.0..1.0)];
            let back = s.chart_inverse(&x, &s.chart_forward(&x, &y).unwrap()).unwrap();
            worst = worst.max(norm(&[back[0] - y[0], back[1] - y[1]]));
        }
        assert!(worst <= 1e-12, "round trip error {worst}");
    }

    #[test]
    fn inversion_failure_is_reported() {
        let s = ChartPerturbedStructure::new(1, vec![1.0], ScalarField::Constant(1.0), 0.1).unwrap();
        // h + 0.1 h² = -5 has no real solution
        assert!(matches!(s.chart_inverse(&[0.0], &[-5.0]), Err(Error::NoInvert { .. })));
    }

    #[test]
    fn oversized_perturbations_rejected() {
        assert!(ChartPerturbedStructure::new(1, vec![1.0], ScalarField::SinCos, 0.05).is_err());
        assert!(ChartPerturbedStructure::new(1, vec![0.5], ScalarField::SinCos, 0.5).is_err());
        assert!(ChartPerturbedStructure::new(2, vec![0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], ScalarField::SinCos, 0.05).is_err());
    }

    #[test]
    fn seeded_charts_are_deterministic() {
        let a = ChartPerturbedStructure::seeded(3, 0.05, 11).unwrap();
        let b = ChartPerturbedStructure::seeded(3, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(DilatationStructure::<f64>::name(&a), "chart:3:0.05:11");
    }

    #[test]
    fn chart_dilation_composes_exactly() {
        let s = ChartPerturbedStructure::default_plane();
        let x = Point(vec![0.2, -0.3]);
        let u = Point(vec![0.5, 0.1]);
        let e = Scale::continuous(0.3).unwrap();
        let m = Scale::continuous(0.6).unwrap();
        let lhs = dilate(&s, &x, e, &dilate(&s, &x, m, &u).unwrap()).unwrap();
        let rhs = dilate(&s, &x, e.mul(&m), &u).unwrap();
        assert!(euclid(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn extended_chart_dilation_composes_to_double_double_precision() {
        use crate::scalar::Extended;
        let s = ChartPerturbedStructure::default_plane();
        let x = Point::<Extended>::from_f64(&[0.2, -0.3]);
        let u = Point::from_f64(&[0.5, 0.1]);
        let e = Scale::ratio(307, 1024).unwrap();
        let m = Scale::ratio(3, 5).unwrap();
        let lhs = dilate(&s, &x, e, &dilate(&s, &x, m, &u).unwrap()).unwrap();
        let rhs = dilate(&s, &x, e.mul(&m), &u).unwrap();
        assert!(euclid(&lhs, &rhs) < 1e-28, "{}", euclid(&lhs, &rhs));
        let back = dilate(&s, &x, e.inv(), &dilate(&s, &x, e, &u).unwrap()).unwrap();
        assert!(euclid(&back, &u) < 1e-28);
    }

    #[test]
    fn chart_tangent_distance_matches_chart_difference() {
        let s = ChartPerturbedStructure::default_plane();
        let x = Point(vec![0.1, 0.2]);
        let u = Point(vec![0.3, 0.1]);
        let v = Point(vec![-0.1, 0.5]);
        let est = tangent_dist(&s, &x, &u, &v, &ScaleGrid::default()).unwrap();
        let want = s.tangent_distance(&x, &u, &v).unwrap();
        assert!((est.value - want).abs() <= 10.0 * 0.5f64.powi(16), "{} vs {want}", est.value);
        assert!(est.order.unwrap() > 0.9);
    }

    #[test]
    fn chart_tangent_sum_against_brute_force() {
        let s = ChartPerturbedStructure::default_plane();
        let x = Point(vec![0.1, 0.2]);
        let u = Point(vec![0.3, 0.1]);
        let v = Point(vec![-0.1, 0.5]);
        let formula = s.tangent_sum(&x, &u, &v).unwrap();
        let brute = crate::ops::sum_op(&s, &x, Scale::continuous(1e-6).unwrap(), &u, &v).unwrap();
        assert!(euclid(&formula, &brute) < 1e-5);
        let est = tangent_sum(&s, &x, &u, &v, &ScaleGrid::default()).unwrap();
        assert!(est.reference_gap.unwrap() < 1e-4);
    }

    #[test]
    fn chart_is_not_linear() {
        let s = ChartPerturbedStructure::default_plane();
        let x = Point(vec![0.0, 0.0]);
        let y = Point(vec![0.4, -0.2]);
        let z = Point(vec![-0.3, 0.35]);
        let half = Scale::continuous(0.5).unwrap();
        assert!(lin_defect(&s, &x, &y, &z, half, half).unwrap() > 1e-6);
    }
}
