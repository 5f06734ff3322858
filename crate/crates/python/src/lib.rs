use pyo3::exceptions::{PyNotImplementedError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dilatlab::analysis::{identity_suite, run_sweep, MapKind, Suite, SweepConfig};
use dilatlab::ccdist::{cc_lower, cc_upper, word_decomposition, CcOptions};
use dilatlab::nilpotent::CarnotGroup;
use dilatlab::registry::{resolve, resolve_group, Instance};
use dilatlab::{
    diff_op, dilate, inv_op, lin_defect, sum_op, tangent_dist, DilatationStructure, Error, Point, Scale, ScaleGrid,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::UnsupportedStep { .. } | Error::UnsupportedVariant(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::UnknownName(_)
        | Error::Parse(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidScale(_)
        | Error::InvalidAlgebra { .. }
        | Error::MissingReference(_)
        | Error::NotContractive(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn grid_of(grid: Option<(f64, f64, usize)>) -> PyResult<ScaleGrid> {
    match grid {
        Some((start, ratio, count)) => ScaleGrid::new(start, ratio, count).map_err(to_py),
        None => Ok(ScaleGrid::default()),
    }
}

/// A dilatation structure resolved from an id such as `euclidean:2` or
/// `conical:heisenberg:koranyi`. Points are lists of floats.
#[pyclass(module = "pydilatlab")]
struct Structure {
    inst: Instance,
}

impl Structure {
    fn s(&self) -> &dyn DilatationStructure<f64> {
        self.inst.float.as_ref()
    }

    fn point(&self, p: Vec<f64>) -> PyResult<Point> {
        let n = self.s().dim();
        if p.len() != n {
            return Err(to_py(Error::DimensionMismatch { expected: n, found: p.len() }));
        }
        Ok(Point(p))
    }

    fn scale(&self, eps: f64) -> PyResult<Scale> {
        Scale::in_group(self.s().scale_group(), eps).map_err(to_py)
    }
}

#[pymethods]
impl Structure {
    #[new]
    fn new(id: &str) -> PyResult<Self> {
        Ok(Structure { inst: resolve(id).map_err(to_py)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inst.id.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.s().dim()
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.inst.center.clone()
    }

    /// `True` when the structure also exists over exact rationals.
    #[getter]
    fn has_exact(&self) -> bool {
        self.inst.exact.is_some()
    }

    fn distance(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        Ok(self.s().distance(&self.point(u)?, &self.point(v)?))
    }

    /// `δ^x_ε y`.
    fn dilate(&self, x: Vec<f64>, eps: f64, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(dilate(self.s(), &self.point(x)?, self.scale(eps)?, &self.point(y)?).map_err(to_py)?.0)
    }

    /// `Σ^x_ε(u, v)`.
    fn sum(&self, x: Vec<f64>, eps: f64, u: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, u, v) = (self.point(x)?, self.point(u)?, self.point(v)?);
        Ok(sum_op(self.s(), &x, self.scale(eps)?, &u, &v).map_err(to_py)?.0)
    }

    /// `Δ^x_ε(u, v)`.
    fn diff(&self, x: Vec<f64>, eps: f64, u: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, u, v) = (self.point(x)?, self.point(u)?, self.point(v)?);
        Ok(diff_op(self.s(), &x, self.scale(eps)?, &u, &v).map_err(to_py)?.0)
    }

    /// `inv^x_ε(u)`.
    fn inv(&self, x: Vec<f64>, eps: f64, u: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, u) = (self.point(x)?, self.point(u)?);
        Ok(inv_op(self.s(), &x, self.scale(eps)?, &u).map_err(to_py)?.0)
    }

    fn lin_defect(&self, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>, eps: f64, mu: f64) -> PyResult<f64> {
        let (x, y, z) = (self.point(x)?, self.point(y)?, self.point(z)?);
        lin_defect(self.s(), &x, &y, &z, self.scale(eps)?, self.scale(mu)?).map_err(to_py)
    }

    /// Estimate of `d^x(u, v)` on a grid `(start, ratio, count)`; returns
    /// `(value, fitted order or None)`.
    #[pyo3(signature = (x, u, v, grid=None))]
    fn tangent_distance(
        &self,
        x: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
        grid: Option<(f64, f64, usize)>,
    ) -> PyResult<(f64, Option<f64>)> {
        let (x, u, v) = (self.point(x)?, self.point(u)?, self.point(v)?);
        let est = tangent_dist(self.s(), &x, &u, &v, &grid_of(grid)?).map_err(to_py)?;
        Ok((est.value, est.order))
    }

    /// Identity suite report as a dict.
    #[pyo3(signature = (samples=200, seed=42))]
    fn identities(&self, py: Python<'_>, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let r = identity_suite(self.s(), &self.inst.center, None, seed, samples, 1e-10).map_err(to_py)?;
        json_to_py(py, &r)
    }

    /// Defect sweep report as a dict. Uses exact arithmetic when available
    /// unless `exact=False`.
    #[pyo3(signature = (defect, samples=200, seed=42, grid=None, map=None, exact=true))]
    fn sweep(
        &self,
        py: Python<'_>,
        defect: &str,
        samples: usize,
        seed: u64,
        grid: Option<(f64, f64, usize)>,
        map: Option<&str>,
        exact: bool,
    ) -> PyResult<Py<PyAny>> {
        let suite: Suite = defect.parse().map_err(to_py)?;
        let map = map.map(str::parse::<MapKind>).transpose().map_err(to_py)?;
        let cfg = SweepConfig { samples, seed, grid: grid_of(grid)?, map, ..SweepConfig::new(suite, self.inst.center.clone()) };
        let report = py.detach(|| match (&self.inst.exact, exact) {
            (Some(e), true) => run_sweep(e.as_ref(), &cfg),
            _ => run_sweep(self.s(), &cfg),
        });
        json_to_py(py, &report.map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Structure('{}')", self.inst.id)
    }
}

/// A Carnot group in exponential coordinates.
#[pyclass(module = "pydilatlab")]
struct Group {
    g: CarnotGroup,
}

impl Group {
    fn check(&self, p: &[f64]) -> PyResult<()> {
        if p.len() != self.g.dim() {
            return Err(to_py(Error::DimensionMismatch { expected: self.g.dim(), found: p.len() }));
        }
        Ok(())
    }
}

#[pymethods]
impl Group {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Group { g: resolve_group(name).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.g.dim()
    }

    #[getter]
    fn step(&self) -> u32 {
        self.g.step()
    }

    fn mul(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        self.check(&y)?;
        Ok(self.g.mul(&x, &y))
    }

    fn inverse(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        Ok(self.g.inverse(&x))
    }

    fn dilation(&self, x: Vec<f64>, eps: f64) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        Ok(self.g.dilation(&x, &eps))
    }

    fn bracket(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        self.check(&y)?;
        Ok(self.g.bracket(&x, &y))
    }

    /// `(lower, upper)` bounds on the Carnot–Carathéodory distance.
    #[pyo3(signature = (x, y, segments=64))]
    fn cc_bounds(&self, py: Python<'_>, x: Vec<f64>, y: Vec<f64>, segments: usize) -> PyResult<(f64, f64)> {
        self.check(&x)?;
        self.check(&y)?;
        let opts = CcOptions { segments, ..CcOptions::default() };
        let r = py.detach(|| cc_upper(&self.g, &x, &y, &opts)).map_err(to_py)?;
        Ok((cc_lower(&self.g, &x, &y), r.upper))
    }

    /// First-layer word as `(generator index, parameter)` pairs.
    fn decompose(&self, x: Vec<f64>) -> PyResult<Vec<(usize, f64)>> {
        self.check(&x)?;
        let w = word_decomposition(&self.g, &x).map_err(to_py)?;
        Ok(w.letters.iter().map(|l| (l.generator, l.t)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.g.name())
    }
}

#[pymodule]
fn pydilatlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_class::<Group>()?;
    Ok(())
}
