//! Maps between structures used by the differentiability and linearity checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// `u ↦ L u + b` with `L_ii = 3/2`, `L_{i,i+1} = 1/4` (cyclic) and `b_i = (i+1)/8`.
    Affine,
    /// `u_i ↦ u_i + u_i²`.
    Quadratic,
    /// `(a, b, c) ↦ (b, -a, c)` on Heisenberg groups, blockwise for `heisenberg:n`.
    Automorphism,
    /// `u_i ↦ u_i + sin(u_i)`.
    Sine,
}

impl std::str::FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(MapKind::Affine),
            "quadratic" => Ok(MapKind::Quadratic),
            "automorphism" => Ok(MapKind::Automorphism),
            "sine" => Ok(MapKind::Sine),
            other => Err(Error::UnknownName(format!("map '{other}'"))),
        }
    }
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Affine => "affine",
            MapKind::Quadratic => "quadratic",
            MapKind::Automorphism => "automorphism",
            MapKind::Sine => "sine",
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if *self == MapKind::Automorphism && (n < 3 || n % 2 == 0) {
            return Err(Error::UnsupportedVariant(format!("automorphism map needs a Heisenberg dimension, got {n}")));
        }
        Ok(())
    }

    pub fn apply<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let n = u.len();
        match self {
            MapKind::Affine => (0..n)
                .map(|i| {
                    let mut y = S::from_ratio(3, 2) * u[i].clone() + S::from_ratio(i as i64 + 1, 8);
                    if n > 1 {
                        y = y + S::from_ratio(1, 4) * u[(i + 1) % n].clone();
                    }
                    y
                })
                .collect(),
            MapKind::Quadratic => u.iter().map(|a| a.clone() + a.clone() * a.clone()).collect(),
            MapKind::Automorphism => {
                let m = (n - 1) / 2;
                let mut out = u.to_vec();
                for i in 0..m {
                    out[i] = u[m + i].clone();
                    out[m + i] = -u[i].clone();
                }
                out
            }
            MapKind::Sine => u.iter().map(|a| S::from_f64(a.to_f64() + a.to_f64().sin())).collect(),
        }
    }

    /// The candidate derivative at `x` evaluated at `u`: the map itself when
    /// it is affine or a morphism, otherwise its affine part at `x`.
    pub fn candidate<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S> {
        match self {
            MapKind::Affine | MapKind::Automorphism => self.apply(u),
            MapKind::Quadratic => {
                let fx = self.apply(x);
                fx.into_iter()
                    .zip(x.iter().zip(u))
                    .map(|(f, (a, b))| f + (S::one() + S::from_ratio(2, 1) * a.clone()) * (b.clone() - a.clone()))
                    .collect()
            }
            MapKind::Sine => {
                let fx = self.apply(x);
                fx.into_iter()
                    .zip(x.iter().zip(u))
                    .map(|(f, (a, b))| f + S::from_f64(1.0 + a.to_f64().cos()) * (b.clone() - a.clone()))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::builtin;
    use crate::scalar::Exact;

    #[test]
    fn affine_values() {
        assert_eq!(MapKind::Affine.apply(&[1.0]), vec![1.625]);
        assert_eq!(MapKind::Affine.apply(&[1.0, 0.0]), vec![1.625, 0.5]);
    }

    #[test]
    fn automorphism_preserves_the_group_law() {
        let h = builtin("heisenberg:1").unwrap();
        let f = MapKind::Automorphism;
        let g: Vec<Exact> = [0.5, -0.25, 0.75].iter().map(|&v| Exact::from_f64(v)).collect();
        let k: Vec<Exact> = [0.125, 1.5, -1.0].iter().map(|&v| Exact::from_f64(v)).collect();
        assert_eq!(f.apply(&h.mul(&g, &k)), h.mul(&f.apply(&g), &f.apply(&k)));
        assert_eq!(f.apply(&[1.0, 2.0, 3.0]), vec![2.0, -1.0, 3.0]);
        assert!(f.check_dim(2).is_err());
    }

    #[test]
    fn quadratic_candidate_is_tangent() {
        let f = MapKind::Quadratic;
        let x = [0.5];
        assert_eq!(f.candidate(&x, &x), f.apply(&x));
        // f(x) + (1 + 2x)(u - x) = 0.75 + 2 * 0.25
        assert_eq!(f.candidate(&x, &[0.75]), vec![1.25]);
    }
}
