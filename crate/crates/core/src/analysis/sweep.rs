//! Defect sweeps over geometric scale grids.
//!
//! A sweep draws its samples up front from a seeded stream, evaluates the
//! per-sample defect at every grid scale in parallel, then takes the sup over
//! samples in sample order. A sample whose evaluation fails at any scale
//! (typically `OutOfDomain`) is dropped and counted in `skipped`.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{diff_op, dilate, lin_defect, relative_dist};
use crate::scalar::Scalar;
use crate::scale::{Scale, ScaleGrid};
use crate::structure::{DilatationStructure, Point};

use super::fit::{fit_order, OrderFit};
use super::maps::MapKind;
use super::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `|(1/ε) d(δ^x_ε u, δ^x_ε v) - d^x(u, v)|`.
    A3,
    /// `d(Δ^x_ε(u, v), Δ^x(u, v))`.
    A4,
    /// `|d^x(u, v) - (1/μ) d^x(δ^x_μ u, δ^x_μ v)|`.
    Cone,
    /// `|d(u', v') - d^x(u', v')| / ε` for `u', v'` in the ball of radius `~ε r`.
    TangentMetric,
    /// `Lin(x, δ^x_ε y, δ^x_ε z; ε, ε) / ε²`.
    Inflin,
    /// Landmark embedding defect, see [`embedding_defect`].
    Embed,
    /// `(1/ε) d(f(δ^x_ε u), δ^{f(x)}_ε Q(u))`.
    Diff,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::A3, Suite::A4, Suite::Cone, Suite::TangentMetric, Suite::Inflin, Suite::Embed, Suite::Diff];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::A3 => "a3",
            Suite::A4 => "a4",
            Suite::Cone => "cone",
            Suite::TangentMetric => "tangent-metric",
            Suite::Inflin => "inflin",
            Suite::Embed => "embed",
            Suite::Diff => "diff",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| Error::UnknownName(format!("defect '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub suite: Suite,
    pub center: Vec<f64>,
    /// Defaults to `0.2 A`.
    pub radius: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub grid: ScaleGrid,
    /// Defects at or below this count as exact.
    pub tolerance: f64,
    /// The map `f` of the `diff` suite.
    pub map: Option<MapKind>,
    /// Number of landmarks of the `embed` suite.
    pub landmarks: usize,
}

impl SweepConfig {
    pub fn new(suite: Suite, center: Vec<f64>) -> Self {
        SweepConfig {
            suite,
            center,
            radius: None,
            samples: 200,
            seed: 42,
            grid: ScaleGrid::default(),
            tolerance: 1e-10,
            map: None,
            landmarks: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub suite: String,
    pub structure: String,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub defects: Vec<f64>,
    pub order: Option<f64>,
    pub residual: Option<f64>,
    pub verdict: Verdict,
    pub skipped: usize,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,defect\n");
        for (e, d) in self.grid.iter().zip(&self.defects) {
            let _ = writeln!(out, "{e:e},{d:e}");
        }
        out
    }

    pub fn fit(&self) -> Option<OrderFit> {
        fit_order(&self.grid.iter().copied().zip(self.defects.iter().copied()).collect::<Vec<_>>()).ok()
    }
}

/// Pass when every defect is within `tolerance`. Otherwise the defects must
/// be seen to vanish: a positive fitted order, a non-increasing last half
/// (strictly decreasing for `strict`) and a final value at most a tenth of
/// the first.
pub fn judge(defects: &[f64], order: Option<f64>, tolerance: f64, strict: bool) -> Verdict {
    if defects.iter().all(|d| *d <= tolerance) {
        return Verdict::Pass;
    }
    let tail = &defects[defects.len() / 2..];
    let decreasing = tail.windows(2).all(|w| {
        if strict {
            w[1] < w[0]
        } else {
            w[1] <= w[0] * (1.0 + 1e-9) || w[1] <= tolerance
        }
    });
    let shrinks = defects.last().copied().unwrap_or(0.0) <= 0.1 * defects[0];
    let positive = strict || order.is_some_and(|p| p > 0.0);
    if decreasing && shrinks && positive {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// `sup_n |φ_ε(u)_n - φ(u)_n|` where
/// `φ_ε(u)_n = (1/ε) d(δ^x_ε u, δ^x_ε x_n) - (1/ε) d(δ^x_ε x, δ^x_ε x_n)` and
/// `φ(u)_n = d^x(u, x_n) - d^x(x, x_n)`.
///
/// `d^x` comes from the structure's closed form, or from `reference_scale`
/// when there is none.
pub fn embedding_defect<S: Scalar, D: DilatationStructure<S> + ?Sized>(
    s: &D,
    x: &Point<S>,
    landmarks: &[Point<S>],
    eps: Scale,
    u: &Point<S>,
    reference_scale: Scale,
) -> Result<f64> {
    let dx = |a: &Point<S>, b: &Point<S>| -> Result<f64> {
        match s.tangent_distance(x, a, b) {
            Some(d) => Ok(d),
            None => relative_dist(s, x, reference_scale, a, b),
        }
    };
    let mut sup: f64 = 0.0;
    for l in landmarks {
        let approx = relative_dist(s, x, eps, u, l)? - relative_dist(s, x, eps, x, l)?;
        let limit = dx(u, l)? - dx(x, l)?;
        sup = sup.max((approx - limit).abs());
    }
    Ok(sup)
}

enum Draw<S: Scalar> {
    Pair(Point<S>, Point<S>),
    One(Point<S>),
}

/// Runs one sweep. Requires the closed-form `d^x` for the cone suite and a
/// map for the diff suite.
pub fn run_sweep<S: Scalar, D: DilatationStructure<S> + ?Sized>(s: &D, cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.grid.validate()?;
    if cfg.center.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: cfg.center.len() });
    }
    let radius = cfg.radius.unwrap_or_else(|| sampling::default_radius(s));
    sampling::check_radius(s, radius)?;
    let x: Point<S> = Point::from_f64(&cfg.center);
    let scales = cfg.grid.scales();
    let smallest = *scales.last().expect("grid is non-empty");
    let map = match cfg.suite {
        Suite::Diff => {
            let m = cfg.map.ok_or_else(|| Error::MissingReference("the diff suite needs a map".into()))?;
            m.check_dim(s.dim())?;
            Some(m)
        }
        _ => None,
    };
    if cfg.suite == Suite::Cone && s.tangent_distance(&x, &x, &x).is_none() {
        return Err(Error::MissingReference(format!("{} has no closed-form tangent distance", s.name())));
    }

    let mut rng: ChaCha8Rng = sampling::rng(cfg.seed);
    let landmarks = if cfg.suite == Suite::Embed {
        sampling::points(s, &x, radius, cfg.landmarks, &mut rng)?
    } else {
        Vec::new()
    };
    let draws: Vec<Draw<S>> = (0..cfg.samples)
        .map(|_| {
            Ok(match cfg.suite {
                Suite::Embed | Suite::Diff => Draw::One(sampling::point(s, &x, radius, &mut rng)?),
                _ => Draw::Pair(sampling::point(s, &x, radius, &mut rng)?, sampling::point(s, &x, radius, &mut rng)?),
            })
        })
        .collect::<Result<_>>()?;

    let evaluate = |draw: &Draw<S>| -> Result<Vec<f64>> {
        match (cfg.suite, draw) {
            (Suite::A3, Draw::Pair(u, v)) => {
                let reference = match s.tangent_distance(&x, u, v) {
                    Some(d) => d,
                    None => relative_dist(s, &x, smallest, u, v)?,
                };
                scales.iter().map(|e| Ok((relative_dist(s, &x, *e, u, v)? - reference).abs())).collect()
            }
            (Suite::A4, Draw::Pair(u, v)) => {
                let reference = match s.tangent_diff(&x, u, v) {
                    Some(p) => p,
                    None => diff_op(s, &x, smallest, u, v)?,
                };
                scales.iter().map(|e| Ok(s.distance(&diff_op(s, &x, *e, u, v)?, &reference))).collect()
            }
            (Suite::Cone, Draw::Pair(u, v)) => {
                let dx = |a: &Point<S>, b: &Point<S>| s.tangent_distance(&x, a, b).expect("checked above");
                let reference = dx(u, v);
                scales
                    .iter()
                    .map(|m| {
                        let (a, b) = (dilate(s, &x, *m, u)?, dilate(s, &x, *m, v)?);
                        Ok((reference - dx(&a, &b) / m.value()).abs())
                    })
                    .collect()
            }
            (Suite::TangentMetric, Draw::Pair(u, v)) => scales
                .iter()
                .map(|e| {
                    let (a, b) = (dilate(s, &x, *e, u)?, dilate(s, &x, *e, v)?);
                    let dx = match s.tangent_distance(&x, &a, &b) {
                        Some(d) => d,
                        None => relative_dist(s, &x, smallest, &a, &b)?,
                    };
                    Ok((s.distance(&a, &b) - dx).abs() / e.value())
                })
                .collect(),
            (Suite::Inflin, Draw::Pair(y, z)) => scales
                .iter()
                .map(|e| {
                    let (a, b) = (dilate(s, &x, *e, y)?, dilate(s, &x, *e, z)?);
                    Ok(lin_defect(s, &x, &a, &b, *e, *e)? / (e.value() * e.value()))
                })
                .collect(),
            (Suite::Embed, Draw::One(u)) => {
                scales.iter().map(|e| embedding_defect(s, &x, &landmarks, *e, u, smallest)).collect()
            }
            (Suite::Diff, Draw::One(u)) => {
                let f = map.expect("checked above");
                let fx = Point(f.apply(&x));
                let q = Point(f.candidate(&x, u));
                scales
                    .iter()
                    .map(|e| {
                        let image = Point(f.apply(&dilate(s, &x, *e, u)?));
                        Ok(s.distance(&image, &dilate(s, &fx, *e, &q)?) / e.value())
                    })
                    .collect()
            }
            _ => unreachable!("draw shape follows the suite"),
        }
    };
    let results: Vec<Result<Vec<f64>>> = draws.par_iter().map(evaluate).collect();

    let mut defects = vec![0.0f64; scales.len()];
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(row) => {
                for (d, v) in defects.iter_mut().zip(row) {
                    // NaN from a failed distance must not vanish in max()
                    *d = if v.is_nan() || d.is_nan() { f64::NAN } else { d.max(v) };
                }
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped == cfg.samples && cfg.samples > 0 {
        return Err(Error::InsufficientSamples(format!("all {skipped} samples fell outside the domain")));
    }
    let grid = cfg.grid.values();
    let fit = fit_order(&grid.iter().copied().zip(defects.iter().copied()).collect::<Vec<_>>()).ok();
    let order = fit.map(|f| f.order);
    let verdict = if defects.iter().any(|d| !d.is_finite()) {
        Verdict::Fail
    } else {
        judge(&defects, order, cfg.tolerance, cfg.suite == Suite::Inflin)
    };
    Ok(SweepReport {
        suite: cfg.suite.name().to_string(),
        structure: s.name(),
        seed: cfg.seed,
        grid,
        defects,
        order,
        residual: fit.map(|f| f.residual),
        verdict,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conical::{as_dilatation_structure, NormedGroupWithDilatations};
    use crate::euclidean::{AffineStructure, ChartPerturbedStructure};
    use crate::nilpotent::{builtin, NormVariant};
    use crate::scalar::Exact;

    fn cfg(suite: Suite, center: &[f64]) -> SweepConfig {
        SweepConfig { samples: 40, ..SweepConfig::new(suite, center.to_vec()) }
    }

    #[test]
    fn euclidean_sweeps_vanish() {
        let s = AffineStructure::new(2);
        for suite in [Suite::A3, Suite::Cone, Suite::TangentMetric, Suite::Inflin, Suite::Embed] {
            let r = run_sweep::<Exact, _>(&s, &cfg(suite, &[0.1, -0.2])).unwrap();
            assert!(r.defects.iter().all(|&d| d < 1e-12), "{suite:?} {:?}", r.defects);
            assert!(r.verdict.passed());
            assert_eq!(r.skipped, 0);
        }
    }

    #[test]
    fn euclidean_a4_is_first_order() {
        // Δ_ε(u, v) - Δ(u, v) = ε (u - x)
        let r = run_sweep::<f64, _>(&AffineStructure::new(2), &cfg(Suite::A4, &[0.0, 0.0])).unwrap();
        assert!((r.order.unwrap() - 1.0).abs() < 1e-6);
        assert!(r.verdict.passed());
    }

    #[test]
    fn heisenberg_a3_and_cone_vanish() {
        let g = NormedGroupWithDilatations::carnot("h", builtin("heisenberg:1").unwrap(), NormVariant::Koranyi).unwrap();
        let s = as_dilatation_structure(g);
        for suite in [Suite::A3, Suite::Cone, Suite::TangentMetric] {
            let r = run_sweep::<Exact, _>(&s, &cfg(suite, &[0.1, 0.2, -0.05])).unwrap();
            assert!(r.defects.iter().all(|&d| d <= 1e-12), "{suite:?} {:?}", r.defects);
        }
    }

    #[test]
    fn float_rounding_is_amplified_by_rescaling() {
        // the same sweep in f64 loses about log2(1/ε) bits at the base point
        let g = NormedGroupWithDilatations::carnot("h", builtin("heisenberg:1").unwrap(), NormVariant::Koranyi).unwrap();
        let r = run_sweep::<f64, _>(&as_dilatation_structure(g), &cfg(Suite::A3, &[0.1, 0.2, -0.05])).unwrap();
        assert!(r.defects[0] < 1e-14);
        assert!(*r.defects.last().unwrap() > 1e-12);
    }

    #[test]
    fn chart_a3_is_first_order() {
        let s = ChartPerturbedStructure::default_plane();
        let r = run_sweep::<f64, _>(&s, &cfg(Suite::A3, &[0.1, 0.2])).unwrap();
        assert!(r.order.unwrap() >= 0.9, "{:?}", r);
        assert!(r.verdict.passed());
    }

    #[test]
    fn quadratic_diff_is_first_order() {
        let mut c = cfg(Suite::Diff, &[0.0]);
        c.map = Some(MapKind::Quadratic);
        let r = run_sweep::<f64, _>(&AffineStructure::new(1), &c).unwrap();
        assert!((r.order.unwrap() - 1.0).abs() < 0.2, "{r:?}");
        c.map = Some(MapKind::Affine);
        let r = run_sweep::<f64, _>(&AffineStructure::new(1), &c).unwrap();
        assert!(r.defects.iter().all(|&d| d <= 1e-10), "{r:?}");
    }

    #[test]
    fn cone_needs_a_closed_form() {
        let base: std::sync::Arc<dyn DilatationStructure> = std::sync::Arc::new(ChartPerturbedStructure::default_plane());
        let grid_one = Scale::continuous(0.5).unwrap();
        let shifted = crate::ops::shifted_structure(base, Point::from_f64(&[0.0, 0.0]), grid_one).unwrap();
        // the shifted structure does carry d^x through its base
        assert!(run_sweep::<f64, _>(&shifted, &cfg(Suite::Cone, &[0.0, 0.0])).is_ok());
        assert!(matches!(
            run_sweep::<f64, _>(&AffineStructure::new(1), &cfg(Suite::Diff, &[0.0])),
            Err(Error::MissingReference(_))
        ));
    }

    #[test]
    fn reports_are_deterministic() {
        let s = ChartPerturbedStructure::default_plane();
        let a = run_sweep::<f64, _>(&s, &cfg(Suite::Inflin, &[0.1, 0.2])).unwrap();
        let b = run_sweep::<f64, _>(&s, &cfg(Suite::Inflin, &[0.1, 0.2])).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.to_csv().starts_with("epsilon,defect\n"));
    }

    #[test]
    fn verdict_rules() {
        assert!(judge(&[0.0, 1e-12], None, 1e-10, false).passed());
        assert!(judge(&[1.0, 0.5, 0.25, 0.125, 0.0625], Some(1.0), 1e-10, false).passed());
        assert!(!judge(&[1.0, 1.0, 1.0, 1.0], Some(0.0), 1e-10, false).passed());
        assert!(!judge(&[1.0, 0.5, 0.25, 0.25, 0.01], None, 1e-10, true).passed());
    }
}
