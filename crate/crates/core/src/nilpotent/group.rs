//! Carnot groups in exponential coordinates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::algebra::GradedLieAlgebra;
use super::bch::BchTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormVariant {
    /// `Σ_i |g_i|^{1/i}` over the layer blocks `g_i`.
    LayerQuasi,
    /// `((a² + b²)² + 16 c²)^{1/4}` on Heisenberg groups.
    Koranyi,
    /// Carnot–Carathéodory distance to the identity (numerical upper bound).
    Cc,
}

impl std::str::FromStr for NormVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layer-quasi" => Ok(NormVariant::LayerQuasi),
            "koranyi" => Ok(NormVariant::Koranyi),
            "cc" => Ok(NormVariant::Cc),
            other => Err(Error::UnknownName(format!("norm variant '{other}'"))),
        }
    }
}

/// A simply connected nilpotent group identified with its stratified Lie
/// algebra; the product is the truncated BCH series.
#[derive(Debug, Clone)]
pub struct CarnotGroup {
    name: String,
    algebra: Arc<GradedLieAlgebra>,
    bch: Arc<BchTable>,
    /// `Some(n)` for the Heisenberg group of dimension `2n + 1` with
    /// `[e_i, e_{n+i}] = e_{2n+1}`.
    heisenberg: Option<usize>,
}

impl PartialEq for CarnotGroup {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra
    }
}

impl CarnotGroup {
    /// Validates the algebra and prepares its BCH table.
    pub fn new(name: impl Into<String>, algebra: GradedLieAlgebra) -> Result<Self> {
        algebra.validate()?;
        let bch = BchTable::new(algebra.step().max(1));
        let heisenberg = detect_heisenberg(&algebra);
        Ok(CarnotGroup { name: name.into(), algebra: Arc::new(algebra), bch: Arc::new(bch), heisenberg })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn step(&self) -> u32 {
        self.algebra.step()
    }

    pub fn weights(&self) -> &[u32] {
        self.algebra.weights()
    }

    pub fn homogeneous_dimension(&self) -> u32 {
        self.algebra.homogeneous_dimension()
    }

    /// Number of first-layer generators.
    pub fn rank(&self) -> usize {
        self.weights().iter().filter(|&&w| w == 1).count()
    }

    /// Indices of the first-layer basis vectors.
    pub fn horizontal_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights()[i] == 1).collect()
    }

    pub fn is_heisenberg(&self) -> bool {
        self.heisenberg.is_some()
    }

    pub fn identity<S: Scalar>(&self) -> Vec<S> {
        vec![S::zero(); self.dim()]
    }

    pub fn bracket<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        self.algebra.bracket(x, y)
    }

    /// `g · h = log(exp g exp h)`.
    pub fn mul<S: Scalar>(&self, g: &[S], h: &[S]) -> Vec<S> {
        self.bch.product(&self.algebra, g, h)
    }

    /// In exponential coordinates the inverse is negation.
    pub fn inverse<S: Scalar>(&self, g: &[S]) -> Vec<S> {
        g.iter().map(|a| -a.clone()).collect()
    }

    /// `δ_ε g`: the weight-`i` coordinates are multiplied by `ε^i`.
    pub fn dilation<S: Scalar>(&self, g: &[S], eps: &S) -> Vec<S> {
        let mut powers = vec![S::one()];
        for _ in 0..self.step() {
            let next = powers.last().expect("non-empty").clone() * eps.clone();
            powers.push(next);
        }
        g.iter().zip(self.weights()).map(|(a, &w)| a.clone() * powers[w as usize].clone()).collect()
    }

    /// Homogeneous norm of `g`. The Korányi norm is only defined on
    /// Heisenberg groups.
    pub fn homogeneous_norm<S: Scalar>(&self, g: &[S], variant: NormVariant) -> Result<f64> {
        match variant {
            NormVariant::LayerQuasi => Ok(self.layer_quasi_norm(g)),
            NormVariant::Koranyi => {
                let n = self
                    .heisenberg
                    .ok_or_else(|| Error::UnsupportedVariant(format!("koranyi norm on {}", self.name)))?;
                let horizontal = g[..2 * n].iter().fold(S::zero(), |acc, a| acc + a.clone() * a.clone());
                let c = g[2 * n].clone();
                let inner = horizontal.clone() * horizontal + S::from_ratio(16, 1) * c.clone() * c;
                Ok(inner.to_f64().sqrt().sqrt())
            }
            NormVariant::Cc => {
                let target: Vec<f64> = g.iter().map(Scalar::to_f64).collect();
                let e = vec![0.0; self.dim()];
                Ok(crate::ccdist::cc_upper(self, &e, &target, &crate::ccdist::CcOptions::default())?.upper)
            }
        }
    }

    fn layer_quasi_norm<S: Scalar>(&self, g: &[S]) -> f64 {
        (1..=self.step())
            .map(|l| {
                let sq = g
                    .iter()
                    .zip(self.weights())
                    .filter(|(_, &w)| w == l)
                    .fold(S::zero(), |acc, (a, _)| acc + a.clone() * a.clone());
                sq.to_f64().sqrt().powf(1.0 / l as f64)
            })
            .sum()
    }
}

fn detect_heisenberg(a: &GradedLieAlgebra) -> Option<usize> {
    let dim = a.dim();
    if dim < 3 || dim % 2 == 0 {
        return None;
    }
    let n = (dim - 1) / 2;
    let mut expected: Vec<(usize, usize, usize, num_rational::BigRational)> = Vec::new();
    for i in 0..n {
        expected.push((i, n + i, dim - 1, num_rational::BigRational::from_integer(1.into())));
        expected.push((n + i, i, dim - 1, num_rational::BigRational::from_integer((-1).into())));
    }
    let mut got = a.nonzero_constants();
    got.sort_by_key(|t| (t.0, t.1, t.2));
    expected.sort_by_key(|t| (t.0, t.1, t.2));
    (got == expected).then_some(n)
}
