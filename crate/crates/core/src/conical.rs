//! Dilatation structures coming from groups with dilatations.
//!
//! A group `G` with a family of dilatations `δ_ε` fixing the identity and a
//! norm `‖·‖` gives the structure `δ^x_ε u = x δ_ε(x⁻¹ u)` with distance
//! `d(x, y) = ‖x⁻¹ y‖`. When every `δ_ε` is a group morphism and the norm is
//! homogeneous the group is conical and the structure is linear.

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilpotent::{CarnotGroup, NormVariant};
use crate::ops::{dilate, tangent_diff, tangent_sum, Estimate};
use crate::scalar::{coord_distance, rational_to_f64, Scalar};
use crate::scale::{Scale, ScaleGrid, ScaleGroup};
use crate::structure::{DilatationStructure, Point, Radii};

/// The group operation.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupLaw {
    Carnot(CarnotGroup),
    /// `R^n` under addition.
    Vector(usize),
}

impl GroupLaw {
    pub fn dim(&self) -> usize {
        match self {
            GroupLaw::Carnot(g) => g.dim(),
            GroupLaw::Vector(n) => *n,
        }
    }

    pub fn mul<S: Scalar>(&self, a: &[S], b: &[S]) -> Vec<S> {
        match self {
            GroupLaw::Carnot(g) => g.mul(a, b),
            GroupLaw::Vector(_) => a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect(),
        }
    }

    pub fn inverse<S: Scalar>(&self, a: &[S]) -> Vec<S> {
        a.iter().map(|x| -x.clone()).collect()
    }

    pub fn identity<S: Scalar>(&self) -> Vec<S> {
        vec![S::zero(); self.dim()]
    }
}

/// A square matrix stored exactly and rounded.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    exact: Vec<BigRational>,
    approx: Vec<f64>,
}

impl RationalMatrix {
    /// Row-major entries; every finite `f64` is converted exactly.
    pub fn from_f64(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        let exact = entries
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    Ok(<BigRational as Scalar>::from_f64(v))
                } else {
                    Err(Error::Parse(format!("matrix entry {v} is not finite")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_exact(n, exact))
    }

    fn from_exact(n: usize, exact: Vec<BigRational>) -> Self {
        let approx = exact.iter().map(rational_to_f64).collect();
        RationalMatrix { n, exact, approx }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.approx
    }

    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(S::zero(), |acc, j| {
                    let m = &self.exact[i * self.n + j];
                    if <BigRational as Scalar>::is_zero(m) || v[j].is_zero() {
                        acc
                    } else {
                        acc + S::from_pair(m, self.approx[i * self.n + j]) * v[j].clone()
                    }
                })
            })
            .collect()
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let zero = <BigRational as Scalar>::zero();
        let one = <BigRational as Scalar>::one();
        let mut a = self.exact.clone();
        let mut inv: Vec<BigRational> =
            (0..n * n).map(|k| if k / n == k % n { one.clone() } else { zero.clone() }).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !<BigRational as Scalar>::is_zero(&a[r * n + col]))?;
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
            let p = a[col * n + col].clone();
            for k in 0..n {
                a[col * n + k] = a[col * n + k].clone() / p.clone();
                inv[col * n + k] = inv[col * n + k].clone() / p.clone();
            }
            for r in 0..n {
                if r != col && !<BigRational as Scalar>::is_zero(&a[r * n + col]) {
                    let f = a[r * n + col].clone();
                    for k in 0..n {
                        let da = f.clone() * a[col * n + k].clone();
                        let di = f.clone() * inv[col * n + k].clone();
                        a[r * n + k] = a[r * n + k].clone() - da;
                        inv[r * n + k] = inv[r * n + k].clone() - di;
                    }
                }
            }
        }
        Some(Self::from_exact(n, inv))
    }

    fn is_diagonal(&self) -> bool {
        (0..self.n * self.n).all(|k| k / self.n == k % self.n || self.approx[k] == 0.0)
    }
}

/// How `δ_ε` acts on group elements.
#[derive(Debug, Clone, PartialEq)]
pub enum DilationFamily {
    /// Layer `i` scaled by `ε^i` (Carnot groups only).
    Graded,
    /// Every coordinate scaled by `ε`.
    Isotropic,
    /// Dyadic family `δ_{2^{-n}} = M^n`, `δ_{2^n} = M^{-n}`.
    Power { m: RationalMatrix, m_inv: RationalMatrix },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupNorm {
    Homogeneous(NormVariant),
    /// Euclidean norm of the coordinates.
    Euclidean,
}

/// A group with dilatations and a norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedGroupWithDilatations {
    name: String,
    law: GroupLaw,
    family: DilationFamily,
    norm: GroupNorm,
    automorphic: bool,
}

impl NormedGroupWithDilatations {
    pub fn new(
        name: impl Into<String>,
        law: GroupLaw,
        family: DilationFamily,
        norm: GroupNorm,
        automorphic: bool,
    ) -> Result<Self> {
        match (&law, &family) {
            (GroupLaw::Vector(_), DilationFamily::Graded) => {
                return Err(Error::UnsupportedVariant("graded dilations need a Carnot group".into()))
            }
            (_, DilationFamily::Power { m, .. }) if m.dim() != law.dim() => {
                return Err(Error::DimensionMismatch { expected: law.dim(), found: m.dim() })
            }
            _ => {}
        }
        if let (GroupNorm::Homogeneous(v), GroupLaw::Vector(_)) = (norm, &law) {
            if v != NormVariant::LayerQuasi {
                return Err(Error::UnsupportedVariant(format!("{v:?} norm on a vector group")));
            }
        }
        if let (GroupNorm::Homogeneous(NormVariant::Koranyi), GroupLaw::Carnot(g)) = (norm, &law) {
            if !g.is_heisenberg() {
                return Err(Error::UnsupportedVariant(format!("koranyi norm on {}", g.name())));
            }
        }
        Ok(NormedGroupWithDilatations { name: name.into(), law, family, norm, automorphic })
    }

    /// A Carnot group with graded dilations and a homogeneous norm.
    pub fn carnot(name: impl Into<String>, g: CarnotGroup, variant: NormVariant) -> Result<Self> {
        Self::new(name, GroupLaw::Carnot(g), DilationFamily::Graded, GroupNorm::Homogeneous(variant), true)
    }

    /// The Heisenberg group with scalar dilations on all coordinates: not
    /// morphisms, so the tangent group at the identity is abelian.
    pub fn heisenberg_isotropic() -> Self {
        let g = crate::nilpotent::builtin("heisenberg:1").expect("built-in");
        Self::new("gwd:heisenberg-isotropic", GroupLaw::Carnot(g), DilationFamily::Isotropic, GroupNorm::Euclidean, false)
            .expect("valid combination")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn law(&self) -> &GroupLaw {
        &self.law
    }

    pub fn family(&self) -> &DilationFamily {
        &self.family
    }

    pub fn norm_kind(&self) -> GroupNorm {
        self.norm
    }

    pub fn is_automorphic(&self) -> bool {
        self.automorphic
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    pub fn scale_group(&self) -> ScaleGroup {
        match self.family {
            DilationFamily::Power { .. } => ScaleGroup::Dyadic,
            _ => ScaleGroup::Continuous,
        }
    }

    /// Whether `‖δ_ε g‖ = ε ‖g‖` holds by construction.
    pub fn is_homogeneous(&self) -> bool {
        match (&self.family, self.norm) {
            (DilationFamily::Graded, GroupNorm::Homogeneous(_)) => true,
            (DilationFamily::Isotropic, GroupNorm::Euclidean) => true,
            (DilationFamily::Isotropic, GroupNorm::Homogeneous(NormVariant::LayerQuasi)) => {
                self.law.dim() == self.weights_or_ones().iter().filter(|&&w| w == 1).count()
            }
            _ => false,
        }
    }

    fn weights_or_ones(&self) -> Vec<u32> {
        match &self.law {
            GroupLaw::Carnot(g) => g.weights().to_vec(),
            GroupLaw::Vector(n) => vec![1; *n],
        }
    }

    pub fn mul<S: Scalar>(&self, a: &[S], b: &[S]) -> Vec<S> {
        self.law.mul(a, b)
    }

    pub fn inverse<S: Scalar>(&self, a: &[S]) -> Vec<S> {
        self.law.inverse(a)
    }

    /// `δ_ε g`.
    pub fn dilation<S: Scalar>(&self, g: &[S], eps: &Scale) -> Result<Vec<S>> {
        match &self.family {
            DilationFamily::Graded => match &self.law {
                GroupLaw::Carnot(c) => Ok(c.dilation(g, &eps.to_scalar::<S>())),
                GroupLaw::Vector(_) => unreachable!("rejected at construction"),
            },
            DilationFamily::Isotropic => {
                let e = eps.to_scalar::<S>();
                Ok(g.iter().map(|a| a.clone() * e.clone()).collect())
            }
            DilationFamily::Power { m, m_inv } => {
                let k = eps
                    .dyadic_exponent()
                    .ok_or_else(|| Error::InvalidScale(format!("{} is not a dyadic scale", eps.value())))?;
                let mat = if k < 0 { m } else { m_inv };
                let mut out = g.to_vec();
                for _ in 0..k.unsigned_abs() {
                    out = mat.apply(&out);
                }
                Ok(out)
            }
        }
    }

    pub fn norm<S: Scalar>(&self, g: &[S]) -> Result<f64> {
        match (self.norm, &self.law) {
            (GroupNorm::Euclidean, _) => Ok(coord_distance(g, &vec![S::zero(); g.len()])),
            (GroupNorm::Homogeneous(v), GroupLaw::Carnot(c)) => c.homogeneous_norm(g, v),
            (GroupNorm::Homogeneous(_), GroupLaw::Vector(_)) => Ok(coord_distance(g, &vec![S::zero(); g.len()])),
        }
    }

    /// `β(x, y)`, the limit of `δ_ε⁻¹(δ_ε x δ_ε y)`, when known in closed form.
    pub fn reference_product<S: Scalar>(&self, x: &[S], y: &[S]) -> Option<Vec<S>> {
        if self.automorphic {
            return Some(self.mul(x, y));
        }
        match (&self.family, &self.law) {
            // only the first-order (vector) part survives the rescaling
            (DilationFamily::Isotropic, GroupLaw::Carnot(_)) => {
                Some(x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect())
            }
            _ => None,
        }
    }

    fn isotropic_carnot(&self) -> bool {
        !self.automorphic
            && matches!((&self.family, &self.law), (DilationFamily::Isotropic, GroupLaw::Carnot(_)))
    }
}

/// `δ^x_ε u = x δ_ε(x⁻¹ u)`.
pub fn left_dilatation<S: Scalar>(g: &NormedGroupWithDilatations, x: &[S], eps: &Scale, u: &[S]) -> Result<Vec<S>> {
    let rel = g.mul(&g.inverse(x), u);
    Ok(g.mul(x, &g.dilation(&rel, eps)?))
}

/// `d(x, y) = ‖x⁻¹ y‖`.
pub fn norm_distance<S: Scalar>(g: &NormedGroupWithDilatations, x: &[S], y: &[S]) -> f64 {
    g.norm(&g.mul(&g.inverse(x), y)).unwrap_or(f64::INFINITY)
}

/// The dilatation structure `(G, δ, d)` of a normed group with dilatations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicalStructure {
    group: NormedGroupWithDilatations,
    radii: Radii,
}

pub fn as_dilatation_structure(g: NormedGroupWithDilatations) -> ConicalStructure {
    ConicalStructure { group: g, radii: Radii::default() }
}

impl ConicalStructure {
    pub fn group(&self) -> &NormedGroupWithDilatations {
        &self.group
    }

    pub fn with_radii(mut self, radii: Radii) -> Self {
        self.radii = radii;
        self
    }

    /// Coordinate half-widths of a box containing the norm ball of radius `r`
    /// about the identity.
    fn box_half_widths(&self, r: f64) -> Vec<f64> {
        let g = &self.group;
        match (g.norm, &g.law) {
            (GroupNorm::Homogeneous(NormVariant::Koranyi), GroupLaw::Carnot(c)) => {
                // ‖(h, c)‖ <= r forces |h| <= r and |c| <= r²/4
                c.weights().iter().map(|&w| if w == 1 { r } else { r * r / 4.0 }).collect()
            }
            (GroupNorm::Homogeneous(NormVariant::LayerQuasi), GroupLaw::Carnot(c)) => {
                c.weights().iter().map(|&w| r.powi(w as i32)).collect()
            }
            (GroupNorm::Homogeneous(NormVariant::Cc), GroupLaw::Carnot(c)) => {
                // generous: first-layer exact, higher layers by the word bound
                c.weights().iter().map(|&w| r.powi(w as i32).max(r)).collect()
            }
            _ => vec![r; g.dim()],
        }
    }
}

impl<S: Scalar> DilatationStructure<S> for ConicalStructure {
    fn name(&self) -> String {
        self.group.name.clone()
    }

    fn dim(&self) -> usize {
        self.group.dim()
    }

    fn scale_group(&self) -> ScaleGroup {
        self.group.scale_group()
    }

    fn radii(&self) -> Radii {
        self.radii
    }

    fn distance(&self, u: &Point<S>, v: &Point<S>) -> f64 {
        norm_distance(&self.group, u, v)
    }

    fn apply_dilation(&self, x: &Point<S>, eps: &Scale, y: &Point<S>) -> Result<Point<S>> {
        left_dilatation(&self.group, x, eps, y).map(Point)
    }

    fn tangent_distance(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<f64> {
        let g = &self.group;
        if g.automorphic && g.is_homogeneous() {
            return Some(norm_distance(g, u, v));
        }
        if g.isotropic_carnot() && g.norm == GroupNorm::Euclidean {
            let p = g.mul(&g.inverse(x), u);
            let q = g.mul(&g.inverse(x), v);
            return Some(coord_distance(&p, &q));
        }
        if let (DilationFamily::Power { m, .. }, GroupLaw::Vector(_), GroupNorm::Euclidean) = (&g.family, &g.law, g.norm) {
            // 2^n M^n w keeps exactly the coordinates where M has entry 1/2
            if m.is_diagonal() && m.entries().iter().step_by(m.dim() + 1).all(|d| d.abs() <= 0.5) {
                let w: Vec<S> = g.mul(&g.inverse(u), v);
                let kept: Vec<f64> = w
                    .iter()
                    .enumerate()
                    .map(|(i, c)| if m.entries()[i * m.dim() + i].abs() == 0.5 { c.to_f64() } else { 0.0 })
                    .collect();
                return Some(kept.iter().map(|c| c * c).sum::<f64>().sqrt());
            }
        }
        None
    }

    fn tangent_sum(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let g = &self.group;
        if g.automorphic {
            // Σ^x(u, v) = u x⁻¹ v
            return Some(Point(g.mul(&g.mul(u, &g.inverse(x)), v)));
        }
        if g.isotropic_carnot() {
            let p = g.mul(&g.inverse(x), u);
            let q = g.mul(&g.inverse(x), v);
            let s: Vec<S> = p.iter().zip(&q).map(|(a, b)| a.clone() + b.clone()).collect();
            return Some(Point(g.mul(x, &s)));
        }
        None
    }

    fn tangent_diff(&self, x: &Point<S>, u: &Point<S>, v: &Point<S>) -> Option<Point<S>> {
        let g = &self.group;
        if g.automorphic {
            // Δ^x(u, v) = x u⁻¹ v
            return Some(Point(g.mul(&g.mul(x, &g.inverse(u)), v)));
        }
        if g.isotropic_carnot() {
            let p = g.mul(&g.inverse(x), u);
            let q = g.mul(&g.inverse(x), v);
            let d: Vec<S> = p.iter().zip(&q).map(|(a, b)| b.clone() - a.clone()).collect();
            return Some(Point(g.mul(x, &d)));
        }
        None
    }

    fn tangent_inv(&self, x: &Point<S>, u: &Point<S>) -> Option<Point<S>> {
        let g = &self.group;
        if g.automorphic || g.isotropic_carnot() {
            // inv^x(u) = x u⁻¹ x
            return Some(Point(g.mul(&g.mul(x, &g.inverse(u)), x)));
        }
        None
    }

    fn propose_in_ball(&self, center: &Point<S>, radius: f64, rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        let h: Vec<f64> = self
            .box_half_widths(radius)
            .into_iter()
            .map(|w| if w > 0.0 { rng.gen_range(-w..=w) } else { 0.0 })
            .collect();
        // d(c, c h) = |h| by left invariance; test in f64 before the exact product
        if self.group.norm(&h).map_or(true, |r| r > radius) {
            return None;
        }
        let h: Vec<S> = h.iter().map(|&c| S::from_f64(c)).collect();
        Some(Point(self.group.mul(center, &h)))
    }
}

fn vector_estimate<S: Scalar>(
    values: Vec<Vec<S>>,
    scales: Vec<f64>,
    reference: Option<Vec<S>>,
) -> Result<Estimate<Vec<S>>> {
    let last = values.last().expect("grid is non-empty").clone();
    let defects: Vec<f64> = match &reference {
        Some(r) => values.iter().map(|v| coord_distance(v, r)).collect(),
        None => values.windows(2).map(|w| coord_distance(&w[0], &w[1])).collect(),
    };
    let used = &scales[..defects.len()];
    let samples: Vec<(f64, f64)> = used.iter().copied().zip(defects.iter().copied()).collect();
    let fit = match crate::analysis::fit::fit_order(&samples) {
        Ok(f) => Some(f),
        Err(Error::NoiseFloor) | Err(Error::InsufficientSamples(_)) => None,
        Err(e) => return Err(e),
    };
    if reference.is_none() {
        let tail = &defects[defects.len() / 2..];
        if !tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) || w[1] <= crate::ops::CAUCHY_FLOOR) {
            return Err(Error::NoConvergence("Cauchy differences do not decrease".into()));
        }
    }
    Ok(Estimate {
        reference_gap: reference.as_ref().map(|r| coord_distance(&last, r)),
        value: last,
        order: fit.map(|f| f.order),
        residual: fit.map(|f| f.residual),
        defects,
        scales: used.to_vec(),
        degenerate: false,
    })
}

/// `β(x, y) = lim δ_ε⁻¹(δ_ε x · δ_ε y)`. When the limit is known in closed
/// form, `defects[k]` is the distance of the scale-`k` value to it;
/// otherwise it is the Cauchy difference between consecutive scales.
pub fn beta_limit<S: Scalar>(
    g: &NormedGroupWithDilatations,
    x: &[S],
    y: &[S],
    grid: &ScaleGrid,
) -> Result<Estimate<Vec<S>>> {
    grid.validate()?;
    let scales = grid.scales();
    let values = scales
        .iter()
        .map(|e| g.dilation(&g.mul(&g.dilation(x, e)?, &g.dilation(y, e)?), &e.inv()))
        .collect::<Result<Vec<_>>>()?;
    vector_estimate(values, grid.values(), g.reference_product(x, y))
}

/// `lim δ_ε⁻¹((δ_ε x)⁻¹)`, compared against `x⁻¹`.
pub fn inverse_limit<S: Scalar>(g: &NormedGroupWithDilatations, x: &[S], grid: &ScaleGrid) -> Result<Estimate<Vec<S>>> {
    grid.validate()?;
    let values = grid
        .scales()
        .iter()
        .map(|e| g.dilation(&g.inverse(&g.dilation(x, e)?), &e.inv()))
        .collect::<Result<Vec<_>>>()?;
    // negation is both the group inverse and the tangent inverse in
    // exponential coordinates
    let reference = (g.automorphic || g.isotropic_carnot()).then(|| g.inverse(x));
    vector_estimate(values, grid.values(), reference)
}

/// `‖x‖^N = lim ‖δ_ε x‖ / ε`.
///
/// Flags `degenerate` when `x ≠ e` and the estimate vanishes: either the
/// final value is below `10⁻⁹ ‖x‖` or the sequence itself decays like a
/// positive power of `ε`.
pub fn norm_limit<S: Scalar>(g: &NormedGroupWithDilatations, x: &[S], grid: &ScaleGrid) -> Result<Estimate<f64>> {
    grid.validate()?;
    let scales = grid.scales();
    let values = scales
        .iter()
        .map(|e| Ok(g.norm(&g.dilation(x, e)?)? / e.value()))
        .collect::<Result<Vec<f64>>>()?;
    let value = *values.last().expect("grid is non-empty");
    let nx = g.norm(x)?;
    let reference = g.is_homogeneous().then_some(nx);
    let defects: Vec<f64> = match reference {
        Some(r) => values.iter().map(|v| (v - r).abs()).collect(),
        None => values.windows(2).map(|w| (w[0] - w[1]).abs()).collect(),
    };
    let grid_values = grid.values();
    let used = &grid_values[..defects.len()];
    let fit = crate::analysis::fit::fit_order(&used.iter().copied().zip(defects.iter().copied()).collect::<Vec<_>>()).ok();
    let decay = crate::analysis::fit::fit_order(&grid_values.iter().copied().zip(values.iter().copied()).collect::<Vec<_>>())
        .map(|f| f.order > 0.5)
        .unwrap_or(false);
    let degenerate = nx > 0.0 && (value < crate::ops::DEGENERACY_TOLERANCE * nx || decay);
    Ok(Estimate {
        value,
        order: fit.map(|f| f.order),
        residual: fit.map(|f| f.residual),
        defects,
        scales: used.to_vec(),
        degenerate,
        reference_gap: reference.map(|r| (r - value).abs()),
    })
}

/// Norm axioms measured on samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `‖e‖ = 0` and `‖g‖ > 0` on every nonzero sample.
    pub positive: bool,
    /// Largest `|‖g⁻¹‖ - ‖g‖|`.
    pub symmetry_defect: f64,
    /// Largest `‖g h‖ / (‖g‖ + ‖h‖)`; `1` for a genuine norm.
    pub subadditivity_constant: f64,
}

/// Samples `count` pairs in the coordinate box `[-1, 1]^n`, plus pairs of
/// first-layer multiples of one vector, where a norm is additive.
pub fn check_norm_axioms(g: &NormedGroupWithDilatations, count: usize, rng: &mut ChaCha8Rng) -> Result<NormReport> {
    let n = g.dim();
    let e = vec![0.0; n];
    let mut positive = g.norm(&e)? == 0.0;
    let mut symmetry_defect: f64 = 0.0;
    let mut constant: f64 = 0.0;
    let weights = g.weights_or_ones();
    for k in 0..count {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = if k % 4 == 0 {
            // same first-layer direction, no higher-layer part
            let t = rng.gen_range(0.1..2.0);
            a.iter().zip(&weights).map(|(c, &w)| if w == 1 { c * t } else { 0.0 }).collect()
        } else {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let a = if k % 4 == 0 {
            a.iter().zip(&weights).map(|(c, &w)| if w == 1 { *c } else { 0.0 }).collect()
        } else {
            a
        };
        let na = g.norm(&a)?;
        let nb = g.norm(&b)?;
        if na <= 0.0 && a.iter().any(|&c| c != 0.0) {
            positive = false;
        }
        symmetry_defect = symmetry_defect.max((g.norm(&g.inverse(&a))? - na).abs());
        if na + nb > 0.0 {
            constant = constant.max(g.norm(&g.mul(&a, &b))? / (na + nb));
        }
    }
    Ok(NormReport { positive, symmetry_defect, subadditivity_constant: constant })
}

/// A group with one contracting automorphism `α` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub enum ContractionGroup {
    /// `α(x) = M x` on `R^n`.
    Linear { m: RationalMatrix },
    /// `α = δ_{1/2}` on a Carnot group.
    CarnotHalf { group: CarnotGroup, norm: NormVariant },
}

impl ContractionGroup {
    pub fn linear(n: usize, entries: &[f64]) -> Result<Self> {
        Ok(ContractionGroup::Linear { m: RationalMatrix::from_f64(n, entries)? })
    }

    pub fn dim(&self) -> usize {
        match self {
            ContractionGroup::Linear { m } => m.dim(),
            ContractionGroup::CarnotHalf { group, .. } => group.dim(),
        }
    }

    pub fn alpha(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ContractionGroup::Linear { m } => m.apply(x),
            ContractionGroup::CarnotHalf { group, .. } => group.dilation(x, &0.5),
        }
    }
}

/// Dyadic dilatations `δ_{2^{-n}} = α^n`, after checking that `α` is an
/// invertible morphism with `α^n(x) → e` on the unit box.
pub fn from_contraction(c: ContractionGroup, name: impl Into<String>) -> Result<NormedGroupWithDilatations> {
    let name = name.into();
    match c {
        ContractionGroup::Linear { m } => {
            let n = m.dim();
            let m_inv = m
                .inverse()
                .ok_or_else(|| Error::NotContractive("matrix is singular, so not an automorphism".into()))?;
            // α^64 must shrink every basis vector below 10⁻⁶
            for i in 0..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                for _ in 0..64 {
                    v = m.apply(&v);
                }
                let size = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if !(size < 1e-6) {
                    return Err(Error::NotContractive(format!("|α^64 e_{}| = {size}", i + 1)));
                }
            }
            let family = DilationFamily::Power { m, m_inv };
            NormedGroupWithDilatations::new(name, GroupLaw::Vector(n), family, GroupNorm::Euclidean, true)
        }
        ContractionGroup::CarnotHalf { group, norm } => {
            let m = RationalMatrix::from_f64(
                group.dim(),
                &(0..group.dim() * group.dim())
                    .map(|k| {
                        let (i, j) = (k / group.dim(), k % group.dim());
                        if i == j {
                            0.5f64.powi(group.weights()[i] as i32)
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            )?;
            let m_inv = m.inverse().expect("diagonal with nonzero entries");
            NormedGroupWithDilatations::new(
                name,
                GroupLaw::Carnot(group),
                DilationFamily::Power { m, m_inv },
                GroupNorm::Homogeneous(norm),
                true,
            )
        }
    }
}

/// `d(δ^u_μ v, Σ^x(u, δ^x_μ Δ^x(u, v)))`.
///
/// Uses the closed-form tangent operations of the structure when it has
/// them and the smallest-scale estimates on `grid` otherwise.
pub fn tangent_reconstruction_defect<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    mu: Scale,
    grid: &ScaleGrid,
) -> Result<f64> {
    let diff = match s.tangent_diff(x, u, v) {
        Some(d) => d,
        None => tangent_diff(s, x, u, v, grid)?.value,
    };
    let moved = dilate(s, x, mu, &diff)?;
    let sum = match s.tangent_sum(x, u, &moved) {
        Some(p) => p,
        None => tangent_sum(s, x, u, &moved, grid)?.value,
    };
    let direct = dilate(s, u, mu, v)?;
    Ok(s.distance(&direct, &sum))
}
