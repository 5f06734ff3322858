//! Graded nilpotent Lie algebras and Carnot groups.

pub mod algebra;
pub mod bch;
pub mod group;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use algebra::{AlgebraReport, GradedLieAlgebra};
pub use bch::BchTable;
pub use group::{CarnotGroup, NormVariant};

use crate::error::{Error, Result};

const ENGEL: &str = include_str!("../../data/engel.json");

/// `heisenberg:n` (dimension `2n + 1`), `abelian:n` or `engel`.
pub fn builtin(name: &str) -> Result<CarnotGroup> {
    let unknown = || Error::UnknownName(format!("group '{name}'"));
    let (family, arg) = match name.split_once(':') {
        Some((f, a)) => (f, Some(a)),
        None => (name, None),
    };
    let size = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(unknown)?.parse::<usize>().ok().filter(|&n| (1..=32).contains(&n)).ok_or_else(unknown)
    };
    let algebra = match family {
        "heisenberg" => {
            let n = size(arg)?;
            let one = BigRational::from_integer(BigInt::from(1));
            let mut weights = vec![1; 2 * n];
            weights.push(2);
            let entries: Vec<_> = (0..n).map(|i| (i, n + i, 2 * n, one.clone())).collect();
            GradedLieAlgebra::from_constants(weights, &entries)?
        }
        "abelian" => GradedLieAlgebra::from_constants(vec![1; size(arg)?], &[])?,
        "engel" if arg.is_none() => GradedLieAlgebra::from_json(ENGEL)?,
        _ => return Err(unknown()),
    };
    CarnotGroup::new(name, algebra)
}

/// A validated group from a JSON algebra file.
pub fn load_group(path: &std::path::Path) -> Result<CarnotGroup> {
    let text = std::fs::read_to_string(path)?;
    CarnotGroup::new(path.display().to_string(), GradedLieAlgebra::from_json(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_dimensions() {
        let h = builtin("heisenberg:1").unwrap();
        assert_eq!((h.dim(), h.weights().to_vec(), h.homogeneous_dimension()), (3, vec![1, 1, 2], 4));
        assert_eq!(builtin("abelian:2").unwrap().homogeneous_dimension(), 2);
        let e = builtin("engel").unwrap();
        assert_eq!((e.dim(), e.weights().to_vec(), e.homogeneous_dimension()), (4, vec![1, 1, 2, 3], 7));
        assert_eq!(e.step(), 3);
    }

    #[test]
    fn unknown_names() {
        for bad in ["heisenberg", "heisenberg:0", "abelian:x", "engel:2", "su2"] {
            assert!(matches!(builtin(bad), Err(Error::UnknownName(_))), "{bad}");
        }
    }
}
