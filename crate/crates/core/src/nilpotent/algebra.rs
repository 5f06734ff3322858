//! Graded nilpotent Lie algebras given by rational structure constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::rational_to_f64;

/// One structure constant `c_{ij}^k`, stored with its `f64` rounding.
#[derive(Debug, Clone, PartialEq)]
struct Constant {
    i: usize,
    j: usize,
    k: usize,
    exact: BigRational,
    approx: f64,
}

/// A real Lie algebra with a basis `e_1..e_n`, a weight per basis vector and
/// brackets `[e_i, e_j] = Σ_k c_{ij}^k e_k`.
///
/// Construction only stores the constants; [`GradedLieAlgebra::validate`]
/// checks that they actually define a stratified algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedLieAlgebra {
    dim: usize,
    weights: Vec<u32>,
    constants: Vec<Constant>,
}

/// Summary of a successfully validated algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub dim: usize,
    pub step: u32,
    pub layer_dims: Vec<usize>,
    pub homogeneous_dimension: u32,
}

/// On-disk format: 1-based indices, `[i, j, k, numerator, denominator]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub weights: Vec<u32>,
    #[serde(default)]
    pub brackets: Vec<[i64; 5]>,
}

impl GradedLieAlgebra {
    /// Builds an algebra from 0-based entries `(i, j, k, c_{ij}^k)`.
    ///
    /// Entries whose transpose `(j, i, k)` is not listed are completed
    /// antisymmetrically; listed transposes are kept as given so that
    /// inconsistent input is caught by validation rather than overwritten.
    pub fn from_constants(weights: Vec<u32>, entries: &[(usize, usize, usize, BigRational)]) -> Result<Self> {
        let dim = weights.len();
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::Parse("weights must be positive".into()));
        }
        for &(i, j, k, _) in entries {
            let bad = [i, j, k].into_iter().find(|&t| t >= dim);
            if let Some(t) = bad {
                return Err(Error::Parse(format!("bracket index {} out of range 1..={dim}", t + 1)));
            }
        }
        let mut table: Vec<Option<BigRational>> = vec![None; dim * dim * dim];
        let at = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for (i, j, k, c) in entries {
            let slot = &mut table[at(*i, *j, *k)];
            *slot = Some(slot.take().unwrap_or_else(BigRational::zero) + c.clone());
        }
        let listed: Vec<bool> = table.iter().map(Option::is_some).collect();
        for (i, j, k, c) in entries {
            if !listed[at(*j, *i, *k)] && i != j {
                table[at(*j, *i, *k)] = Some(-c.clone());
            }
        }
        let mut constants = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if let Some(c) = &table[at(i, j, k)] {
                        if !c.is_zero() {
                            constants.push(Constant { i, j, k, approx: rational_to_f64(c), exact: c.clone() });
                        }
                    }
                }
            }
        }
        Ok(GradedLieAlgebra { dim, weights, constants })
    }

    /// Parses the JSON algebra format without validating.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: AlgebraFile = serde_json::from_str(text)?;
        if file.weights.len() != file.dim {
            return Err(Error::DimensionMismatch { expected: file.dim, found: file.weights.len() });
        }
        let mut entries = Vec::with_capacity(file.brackets.len());
        for [i, j, k, num, den] in file.brackets {
            if den == 0 {
                return Err(Error::Parse("zero denominator in structure constant".into()));
            }
            if i < 1 || j < 1 || k < 1 {
                return Err(Error::Parse("bracket indices are 1-based".into()));
            }
            entries.push((
                i as usize - 1,
                j as usize - 1,
                k as usize - 1,
                BigRational::new(BigInt::from(num), BigInt::from(den)),
            ));
        }
        Self::from_constants(file.weights, &entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn step(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        (1..=self.step()).map(|l| self.weights.iter().filter(|&&w| w == l).count()).collect()
    }

    /// `Q = Σ_i i dim V_i`.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// `c_{ij}^k` with 0-based indices.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> BigRational {
        self.constants
            .iter()
            .find(|c| (c.i, c.j, c.k) == (i, j, k))
            .map(|c| c.exact.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Non-zero constants as 0-based `(i, j, k, c)`.
    pub fn nonzero_constants(&self) -> Vec<(usize, usize, usize, BigRational)> {
        self.constants.iter().map(|c| (c.i, c.j, c.k, c.exact.clone())).collect()
    }

    /// `[X, Y] = Σ c_{ij}^k X_i Y_j e_k`.
    pub fn bracket<S: crate::scalar::Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for c in &self.constants {
            if x[c.i].is_zero() || y[c.j].is_zero() {
                continue;
            }
            let term = S::from_pair(&c.exact, c.approx) * x[c.i].clone() * y[c.j].clone();
            out[c.k] = out[c.k].clone() + term;
        }
        out
    }

    /// Checks antisymmetry, the Jacobi identity, compatibility with the
    /// grading and generation by the first layer, in that order, with exact
    /// arithmetic. The error names the first violation with 1-based indices.
    pub fn validate(&self) -> Result<AlgebraReport> {
        let n = self.dim;
        let c = |i, j, k| self.constant(i, j, k);
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if c(i, j, k) + c(j, i, k) != BigRational::zero() {
                        return Err(Error::InvalidAlgebra {
                            identity: "antisymmetry".into(),
                            indices: vec![i + 1, j + 1, k + 1],
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for p in 0..n {
                        let mut acc = BigRational::zero();
                        for l in 0..n {
                            acc += c(i, j, l) * c(l, k, p) + c(j, k, l) * c(l, i, p) + c(k, i, l) * c(l, j, p);
                        }
                        if !acc.is_zero() {
                            return Err(Error::InvalidAlgebra {
                                identity: "jacobi".into(),
                                indices: vec![i + 1, j + 1, k + 1, p + 1],
                            });
                        }
                    }
                }
            }
        }
        for e in &self.constants {
            if self.weights[e.k] != self.weights[e.i] + self.weights[e.j] {
                return Err(Error::InvalidAlgebra {
                    identity: "grading".into(),
                    indices: vec![e.i + 1, e.j + 1, e.k + 1],
                });
            }
        }
        let step = self.step();
        let layer = |l: u32| -> Vec<usize> { (0..n).filter(|&i| self.weights[i] == l).collect() };
        for l in 1..step {
            let target = layer(l + 1);
            let mut rows = Vec::new();
            for &a in &layer(1) {
                for &b in &layer(l) {
                    rows.push(target.iter().map(|&k| c(a, b, k)).collect::<Vec<_>>());
                }
            }
            if rational_rank(rows, target.len()) != target.len() {
                return Err(Error::InvalidAlgebra {
                    identity: "generation".into(),
                    indices: vec![l as usize + 1],
                });
            }
        }
        if n > 0 && layer(1).is_empty() {
            return Err(Error::InvalidAlgebra { identity: "generation".into(), indices: vec![1] });
        }
        Ok(AlgebraReport {
            dim: n,
            step,
            layer_dims: self.layer_dims(),
            homogeneous_dimension: self.homogeneous_dimension(),
        })
    }
}

/// Rank of a rational matrix by fraction-exact Gaussian elimination.
fn rational_rank(mut rows: Vec<Vec<BigRational>>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone() / p.clone();
                for k in col..cols {
                    let delta = f.clone() * rows[rank][k].clone();
                    rows[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn heisenberg() -> GradedLieAlgebra {
        GradedLieAlgebra::from_constants(vec![1, 1, 2], &[(0, 1, 2, q(1))]).unwrap()
    }

    #[test]
    fn heisenberg_bracket() {
        let h = heisenberg();
        assert_eq!(h.bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(h.bracket(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]), vec![0.0, 0.0, -1.0]);
        assert_eq!(h.bracket(&[0.3, 0.7, 0.0], &[0.3, 0.7, 0.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(h.bracket(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn heisenberg_validates() {
        let r = heisenberg().validate().unwrap();
        assert_eq!(r, AlgebraReport { dim: 3, step: 2, layer_dims: vec![2, 1], homogeneous_dimension: 4 });
    }

    #[test]
    fn abelian_validates() {
        let r = GradedLieAlgebra::from_constants(vec![1; 4], &[]).unwrap().validate().unwrap();
        assert_eq!((r.step, r.homogeneous_dimension), (1, 4));
    }

    #[test]
    fn symmetric_constants_fail_antisymmetry() {
        let a = GradedLieAlgebra::from_constants(vec![1, 1, 2], &[(0, 1, 2, q(1)), (1, 0, 2, q(1))]).unwrap();
        assert_eq!(
            a.validate().unwrap_err(),
            Error::InvalidAlgebra { identity: "antisymmetry".into(), indices: vec![1, 2, 3] }
        );
    }

    #[test]
    fn jacobi_violation_detected() {
        // [[e1, e2], e4] = e5 while e4 commutes with e1 and e2
        let a = GradedLieAlgebra::from_constants(vec![1, 1, 2, 1, 3], &[(0, 1, 2, q(1)), (2, 3, 4, q(1))]).unwrap();
        assert_eq!(
            a.validate().unwrap_err(),
            Error::InvalidAlgebra { identity: "jacobi".into(), indices: vec![1, 2, 4, 5] }
        );
    }

    #[test]
    fn grading_violation_detected() {
        let a = GradedLieAlgebra::from_constants(vec![1, 1, 3], &[(0, 1, 2, q(1))]).unwrap();
        assert_eq!(
            a.validate().unwrap_err(),
            Error::InvalidAlgebra { identity: "grading".into(), indices: vec![1, 2, 3] }
        );
    }

    #[test]
    fn non_generated_layer_detected() {
        // e3 has weight 2 but nothing brackets into it
        let a = GradedLieAlgebra::from_constants(vec![1, 1, 2], &[]).unwrap();
        assert_eq!(a.validate().unwrap_err(), Error::InvalidAlgebra { identity: "generation".into(), indices: vec![2] });
    }

    #[test]
    fn json_round_trip() {
        let a = GradedLieAlgebra::from_json(r#"{"dim":3,"weights":[1,1,2],"brackets":[[1,2,3,1,1]]}"#).unwrap();
        assert_eq!(a, heisenberg());
        assert_eq!(a.constant(1, 0, 2), q(-1));
    }

    #[test]
    fn json_errors() {
        assert!(GradedLieAlgebra::from_json(r#"{"dim":3,"weights":[1,1],"brackets":[]}"#).is_err());
        assert!(GradedLieAlgebra::from_json(r#"{"dim":3,"weights":[1,1,2],"brackets":[[1,2,4,1,1]]}"#).is_err());
        assert!(GradedLieAlgebra::from_json(r#"{"dim":3,"weights":[1,1,2],"brackets":[[1,2,3,1,0]]}"#).is_err());
        assert!(GradedLieAlgebra::from_json("not json").is_err());
    }
}
