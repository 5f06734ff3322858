//! Structure ids used by the command line and the test suites.
//!
//! | id | structure |
//! |----|-----------|
//! | `euclidean:n` | affine `R^n` |
//! | `chart:2`, `chart:n:eta:seed` | chart-perturbed `R^n` |
//! | `conical:heisenberg` | Heisenberg group with graded dilations and the Korányi norm |
//! | `conical:<group>[:<norm>]` | any Carnot group, norm `layer-quasi` (default), `koranyi` or `cc` |
//! | `gwd:heisenberg-isotropic` | Heisenberg group with scalar dilations |
//! | `contraction:diag:a,b,...` | `R^n` with dyadic dilations `diag(a, b, ...)^k` |
//! | `contraction:matrix:<file>` | same with a row-major JSON matrix |
//! | `shift:<mu>:<id>` | the shifted structure of `<id>` at its center |
//!
//! `<group>` is a built-in name (`heisenberg` means `heisenberg:1`) or a path
//! to a JSON algebra file.

use std::sync::Arc;

use crate::conical::{as_dilatation_structure, from_contraction, ContractionGroup, NormedGroupWithDilatations};
use crate::error::{Error, Result};
use crate::euclidean::{AffineStructure, ChartPerturbedStructure};
use crate::nilpotent::{builtin, load_group, CarnotGroup, NormVariant};
use crate::ops::shifted_structure;
use crate::scalar::{Exact, Extended};
use crate::scale::Scale;
use crate::structure::{DilatationStructure, Point};

/// A resolved structure id.
#[derive(Clone)]
pub struct Instance {
    pub id: String,
    pub float: Arc<dyn DilatationStructure<f64>>,
    /// The same structure over rationals, when its formulas allow it.
    pub exact: Option<Arc<dyn DilatationStructure<Exact>>>,
    /// The same structure in double-double, for transcendental formulas.
    pub extended: Option<Arc<dyn DilatationStructure<Extended>>>,
    /// Default base point of sweeps.
    pub center: Vec<f64>,
    /// The underlying group, for group-based instances.
    pub group: Option<NormedGroupWithDilatations>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("id", &self.id)
            .field("exact", &self.exact.is_some())
            .field("extended", &self.extended.is_some())
            .field("center", &self.center)
            .finish()
    }
}

/// Id patterns with a one-line description, for `list`.
pub const PATTERNS: [(&str, &str); 10] = [
    ("euclidean:n", "affine R^n, exact cone, linear"),
    ("chart:2", "chart-perturbed R^2, strong but not linear"),
    ("chart:n:eta:seed", "chart-perturbed R^n with seeded coefficients"),
    ("conical:heisenberg:koranyi", "Heisenberg group, graded dilations, Koranyi norm (alias conical:heisenberg)"),
    ("conical:abelian:n", "R^n as an abelian Carnot group"),
    ("conical:<group>:<norm>", "Carnot group (built-in or JSON file), norm layer-quasi|koranyi|cc"),
    ("gwd:heisenberg-isotropic", "Heisenberg group with scalar dilations, abelian tangent"),
    ("contraction:diag:a,b,...", "R^n with dyadic dilations diag(a,b,...)^k"),
    ("contraction:matrix:<file>", "R^n with dyadic dilations M^k, M row-major JSON"),
    ("shift:<mu>:<id>", "shifted structure of <id> at its center"),
];

/// A center away from the origin so that sweeps do not sit on a symmetry.
pub fn default_center(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 0.125 } else { -0.25 }).collect()
}

/// A built-in group name, `heisenberg` for `heisenberg:1`, or a JSON file.
pub fn resolve_group(name: &str) -> Result<CarnotGroup> {
    if name == "heisenberg" {
        return builtin("heisenberg:1");
    }
    if name.ends_with(".json") {
        return load_group(std::path::Path::new(name));
    }
    builtin(name)
}

fn unknown(id: &str) -> Error {
    Error::UnknownName(format!("structure '{id}'"))
}

fn group_instance(id: &str, g: NormedGroupWithDilatations) -> Instance {
    let center = default_center(g.dim());
    let s = as_dilatation_structure(g.clone());
    Instance {
        id: id.to_string(),
        float: Arc::new(s.clone()),
        exact: Some(Arc::new(s)),
        extended: None,
        center,
        group: Some(g),
    }
}

fn chart_instance(id: &str, s: ChartPerturbedStructure) -> Instance {
    Instance {
        id: id.to_string(),
        center: default_center(DilatationStructure::<f64>::dim(&s)),
        float: Arc::new(s.clone()),
        exact: None,
        extended: Some(Arc::new(s)),
        group: None,
    }
}

fn parse_dim(id: &str, s: &str) -> Result<usize> {
    s.parse::<usize>().ok().filter(|n| (1..=64).contains(n)).ok_or_else(|| unknown(id))
}

fn contraction(id: &str, n: usize, entries: &[f64]) -> Result<Instance> {
    let g = from_contraction(ContractionGroup::linear(n, entries)?, id)?;
    let mut inst = group_instance(id, g);
    inst.center = vec![0.0; n];
    Ok(inst)
}

fn read_matrix(path: &str) -> Result<(usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{path}: matrix must be square and non-empty")));
    }
    Ok((n, rows.concat()))
}

/// Resolves a structure id. Unknown ids are an error.
pub fn resolve(id: &str) -> Result<Instance> {
    if let Some(rest) = id.strip_prefix("euclidean:") {
        let n = parse_dim(id, rest)?;
        let s = AffineStructure::new(n);
        return Ok(Instance {
            id: id.to_string(),
            float: Arc::new(s.clone()),
            exact: Some(Arc::new(s)),
            extended: None,
            center: default_center(n),
            group: None,
        });
    }
    if id == "chart:2" {
        return Ok(chart_instance(id, ChartPerturbedStructure::default_plane()));
    }
    if let Some(rest) = id.strip_prefix("chart:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(unknown(id));
        }
        let n = parse_dim(id, parts[0])?;
        let eta: f64 = parts[1].parse().map_err(|_| unknown(id))?;
        let seed: u64 = parts[2].parse().map_err(|_| unknown(id))?;
        return Ok(chart_instance(id, ChartPerturbedStructure::seeded(n, eta, seed)?));
    }
    if id == "gwd:heisenberg-isotropic" {
        return Ok(group_instance(id, NormedGroupWithDilatations::heisenberg_isotropic()));
    }
    if let Some(rest) = id.strip_prefix("conical:") {
        let (group, norm) = match rest.rsplit_once(':') {
            Some((g, n)) if n.parse::<NormVariant>().is_ok() => (g, n.parse::<NormVariant>()?),
            _ if rest == "heisenberg" => (rest, NormVariant::Koranyi),
            _ => (rest, NormVariant::LayerQuasi),
        };
        let g = resolve_group(group).map_err(|e| match e {
            Error::UnknownName(_) => unknown(id),
            other => other,
        })?;
        let canonical = if rest == "heisenberg" { "conical:heisenberg:koranyi" } else { id };
        return Ok(group_instance(canonical, NormedGroupWithDilatations::carnot(canonical, g, norm)?));
    }
    if let Some(rest) = id.strip_prefix("contraction:diag:") {
        let diag: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| unknown(id)))
            .collect::<Result<_>>()?;
        let n = diag.len();
        let entries: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { diag[k / n] } else { 0.0 }).collect();
        return contraction(id, n, &entries);
    }
    if let Some(path) = id.strip_prefix("contraction:matrix:") {
        let (n, entries) = read_matrix(path)?;
        return contraction(id, n, &entries);
    }
    if let Some(rest) = id.strip_prefix("shift:") {
        let (mu, base_id) = rest.split_once(':').ok_or_else(|| unknown(id))?;
        let mu: f64 = mu.parse().map_err(|_| unknown(id))?;
        let base = resolve(base_id)?;
        let mu = Scale::in_group(base.float.scale_group(), mu)?;
        let float = shifted_structure(base.float.clone(), Point::from_f64(&base.center), mu)?;
        let exact = match &base.exact {
            Some(e) => Some(Arc::new(shifted_structure(e.clone(), Point::from_f64(&base.center), mu)?)
                as Arc<dyn DilatationStructure<Exact>>),
            None => None,
        };
        let extended = match &base.extended {
            Some(e) => Some(Arc::new(shifted_structure(e.clone(), Point::from_f64(&base.center), mu)?)
                as Arc<dyn DilatationStructure<Extended>>),
            None => None,
        };
        return Ok(Instance {
            id: id.to_string(),
            float: Arc::new(float),
            exact,
            extended,
            center: base.center,
            group: None,
        });
    }
    Err(unknown(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_ids_resolve() {
        for id in [
            "euclidean:2",
            "chart:2",
            "chart:3:0.05:7",
            "conical:heisenberg",
            "conical:heisenberg:koranyi",
            "conical:abelian:3",
            "conical:engel:layer-quasi",
            "conical:heisenberg:2:koranyi",
            "gwd:heisenberg-isotropic",
            "contraction:diag:0.5,0.25",
            "shift:0.5:chart:2",
            "shift:0.25:conical:heisenberg",
        ] {
            let inst = resolve(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(inst.center.len(), inst.float.dim());
        }
        assert_eq!(resolve("conical:heisenberg").unwrap().id, "conical:heisenberg:koranyi");
        assert!(resolve("chart:2").unwrap().exact.is_none());
        assert!(resolve("shift:0.5:chart:2").unwrap().extended.is_some());
        assert!(resolve("shift:0.5:euclidean:2").unwrap().exact.is_some());
    }

    #[test]
    fn unknown_ids_are_errors() {
        for id in ["nosuch", "euclidean:0", "euclidean:x", "conical:nosuch", "chart:2:1", "shift:0.5:nosuch"] {
            assert!(matches!(resolve(id), Err(Error::UnknownName(_))), "{id}");
        }
        assert!(matches!(resolve("contraction:diag:0.5,1.0"), Err(Error::NotContractive(_))));
        assert!(matches!(resolve("conical:engel:koranyi"), Err(Error::UnsupportedVariant(_))));
        assert!(matches!(resolve("shift:0.3:contraction:diag:0.5,0.25"), Err(Error::InvalidScale(_))));
        assert!(matches!(resolve("contraction:matrix:/nonexistent.json"), Err(Error::Io(_))));
    }

    #[test]
    fn matrix_file() {
        let dir = std::env::temp_dir().join(format!("dilatlab-registry-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        std::fs::write(&path, "[[0.5, 0.0], [0.0, 0.25]]").unwrap();
        let inst = resolve(&format!("contraction:matrix:{}", path.display())).unwrap();
        assert_eq!(inst.float.dim(), 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
