//! Python bindings: `import conformal_plap`.

use conformal_plap::conformal::AnalyticMap;
use conformal_plap::eigen::{self, RasterDomain, SolverConfig};
use conformal_plap::quadrature::{self, Exponent, QuadratureGrid};
use conformal_plap::sobolev::{self, SPQuery};
use conformal_plap::spectral::{self, quasidisc, BoundReport, SupSource};
use conformal_plap::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn grid(nodes: usize, levels: usize) -> PyResult<QuadratureGrid> {
    QuadratureGrid::new(nodes, nodes, levels).map_err(py_err)
}

/// A conformal map from the unit disc or a rectangle, e.g.
/// `Map("epicycloid n=3")` or `Map("sine d=1")`.
#[pyclass(name = "Map", frozen)]
struct PyMap {
    inner: AnalyticMap,
}

#[pymethods]
impl PyMap {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyMap { inner: spec.parse().map_err(py_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Map(\"{}\")", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn eval(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval(z).map_err(py_err)
    }

    fn derivative(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.derivative(z).map_err(py_err)
    }

    fn jacobian(&self, z: Complex64) -> PyResult<f64> {
        self.inner.jacobian(z).map_err(py_err)
    }

    fn conformal_radius(&self, w: Complex64) -> PyResult<f64> {
        self.inner.conformal_radius(w).map_err(py_err)
    }

    /// Measure of the base domain (π for the disc).
    fn base_measure(&self) -> f64 {
        self.inner.base().measure()
    }

    #[pyo3(signature = (nodes = 64, levels = 3))]
    fn image_area(&self, nodes: usize, levels: usize) -> PyResult<f64> {
        Ok(quadrature::image_area(&self.inner, &grid(nodes, levels)?).map_err(py_err)?.value)
    }

    /// `‖J | L^α‖` over the base; `alpha=None` gives the grid supremum.
    #[pyo3(signature = (alpha = None, nodes = 64, levels = 3))]
    fn jacobian_norm(&self, alpha: Option<f64>, nodes: usize, levels: usize) -> PyResult<f64> {
        let e = alpha.map(Exponent::Finite).unwrap_or(Exponent::Infinite);
        Ok(quadrature::jacobian_alpha_norm(&self.inner, e, &grid(nodes, levels)?).map_err(py_err)?.value)
    }

    #[pyo3(signature = (n = 4096))]
    fn boundary_polyline(&self, n: usize) -> PyResult<Vec<Complex64>> {
        self.inner.boundary_polyline(n).map_err(py_err)
    }
}

/// A lower bound `λ_p >= exp(-log_rhs)` with its logarithmic factors.
#[pyclass(name = "BoundReport", frozen)]
struct PyBoundReport {
    inner: BoundReport,
}

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn theorem_tag(&self) -> PyResult<String> {
        let v = serde_json::to_value(self.inner.theorem_tag).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(v.as_str().unwrap_or_default().to_string())
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.alpha
    }

    #[getter(K)]
    fn k(&self) -> Option<f64> {
        self.inner.k
    }

    #[getter]
    fn beta(&self) -> Option<f64> {
        self.inner.beta
    }

    #[getter]
    fn optimal_q(&self) -> f64 {
        self.inner.optimal_q
    }

    #[getter]
    fn optimal_alpha(&self) -> Option<f64> {
        self.inner.optimal_alpha
    }

    #[getter]
    fn log_rhs(&self) -> f64 {
        self.inner.log_rhs
    }

    /// `exp(-log_rhs)`; 0 when that underflows.
    #[getter]
    fn lower_bound(&self) -> f64 {
        self.inner.lower_bound_lambda.value
    }

    #[getter]
    fn lower_bound_log(&self) -> f64 {
        self.inner.lower_bound_lambda.log_value
    }

    /// `(name, log value)` pairs in the order they enter the bound.
    #[getter]
    fn factors(&self) -> Vec<(String, f64)> {
        self.inner.factors.iter().map(|f| (f.name.clone(), f.log_value)).collect()
    }

    fn factor(&self, name: &str) -> Option<f64> {
        self.inner.factor(name)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundReport({}, p={}, lower_bound_log={})",
            self.theorem_tag().unwrap_or_default(),
            self.inner.p,
            self.inner.lower_bound_lambda.log_value
        )
    }
}

fn report(r: conformal_plap::Result<BoundReport>) -> PyResult<PyBoundReport> {
    Ok(PyBoundReport { inner: r.map_err(py_err)? })
}

/// `A_{r,q}` of the unit disc (or of a domain of `area` when `q = 2`).
#[pyfunction]
#[pyo3(signature = (r, q, area = None))]
fn sp_constant(r: f64, q: f64, area: Option<f64>) -> PyResult<f64> {
    sobolev::sp_constant(&SPQuery::new(r, q, area).map_err(py_err)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (map, p, q, nodes = 64, levels = 3))]
fn composition_norm(map: &PyMap, p: f64, q: f64, nodes: usize, levels: usize) -> PyResult<f64> {
    sobolev::composition_norm_conformal(&map.inner, p, q, &grid(nodes, levels)?).map_err(py_err)
}

/// `q*` for exponent `alpha`; `alpha=None` means `∞`.
#[pyfunction]
#[pyo3(signature = (p, alpha = None))]
fn qstar(p: f64, alpha: Option<f64>) -> f64 {
    spectral::qstar(p, alpha.map(Exponent::Finite).unwrap_or(Exponent::Infinite))
}

#[pyfunction]
#[pyo3(signature = (p, alpha, map, nodes = 64, levels = 3))]
fn lower_bound_alpha_regular(p: f64, alpha: f64, map: &PyMap, nodes: usize, levels: usize) -> PyResult<PyBoundReport> {
    report(spectral::lower_bound_alpha_regular(p, alpha, &map.inner, &grid(nodes, levels)?))
}

#[pyfunction]
#[pyo3(signature = (p, map, nodes = 64, levels = 3))]
fn lower_bound_infty_regular(p: f64, map: &PyMap, nodes: usize, levels: usize) -> PyResult<PyBoundReport> {
    report(spectral::lower_bound_infty_regular(p, &map.inner, &grid(nodes, levels)?, SupSource::ClosedForm))
}

#[pyfunction]
#[allow(non_snake_case)]
fn quasidisc_lower_bound(p: f64, K: f64, area: f64) -> PyResult<PyBoundReport> {
    report(spectral::quasidisc_lower_bound(p, K, area))
}

#[pyfunction]
fn star_spiral_k(beta: f64) -> PyResult<f64> {
    spectral::star_spiral_k(beta).map_err(py_err)
}

#[pyfunction]
fn star_spiral_lower_bound(p: f64, beta: f64, area: f64) -> PyResult<PyBoundReport> {
    report(spectral::star_spiral_lower_bound(p, beta, area))
}

/// `ln M_p(K)`.
#[pyfunction]
#[allow(non_snake_case)]
fn m_p_k_log(p: f64, K: f64) -> PyResult<f64> {
    spectral::m_p_k_log(p, K).map_err(py_err)
}

#[pyfunction]
#[allow(non_snake_case)]
fn nu(alpha: f64, K: f64) -> f64 {
    spectral::nu(alpha, K)
}

/// `α̃ - 1`, which is below `1e-13`.
#[pyfunction]
#[allow(non_snake_case)]
fn alpha_tilde_excess(K: f64) -> PyResult<f64> {
    spectral::alpha_tilde_excess(K).map_err(py_err)
}

#[pyfunction]
#[allow(non_snake_case)]
fn exp_term_log(K: f64) -> f64 {
    quasidisc::exp_term_log(K)
}

fn solver(p: f64, tol: f64) -> PyResult<SolverConfig> {
    SolverConfig::new(p).and_then(|c| c.with_tolerance(tol)).map_err(py_err)
}

/// Finite-difference approximation of `λ_p` on the map's image; returns a
/// dict with `lambda`, `iterations`, `residual`, `mask_area` and `h`.
#[pyfunction]
#[pyo3(signature = (map, p, h = 1.0 / 64.0, tol = 1e-10))]
fn first_eigenvalue<'py>(py: Python<'py>, map: &PyMap, p: f64, h: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let config = solver(p, tol)?;
    let domain = RasterDomain::from_map(&map.inner, h).map_err(py_err)?;
    let e = py.detach(|| eigen::first_eigenvalue(&domain, &config)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("lambda", e.lambda)?;
    d.set_item("iterations", e.iterations)?;
    d.set_item("residual", e.residual)?;
    d.set_item("mask_area", e.mask_area)?;
    d.set_item("h", e.h)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (map, p, h = 1.0 / 64.0, tol = 1e-10))]
fn faber_krahn_gap(py: Python<'_>, map: &PyMap, p: f64, h: f64, tol: f64) -> PyResult<f64> {
    let config = solver(p, tol)?;
    let domain = RasterDomain::from_map(&map.inner, h).map_err(py_err)?;
    py.detach(|| eigen::faber_krahn_gap(&domain, &config)).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "conformal_plap")]
fn conformal_plap_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_function(wrap_pyfunction!(sp_constant, m)?)?;
    m.add_function(wrap_pyfunction!(composition_norm, m)?)?;
    m.add_function(wrap_pyfunction!(qstar, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_alpha_regular, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_infty_regular, m)?)?;
    m.add_function(wrap_pyfunction!(quasidisc_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(star_spiral_k, m)?)?;
    m.add_function(wrap_pyfunction!(star_spiral_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(m_p_k_log, m)?)?;
    m.add_function(wrap_pyfunction!(nu, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_tilde_excess, m)?)?;
    m.add_function(wrap_pyfunction!(exp_term_log, m)?)?;
    m.add_function(wrap_pyfunction!(first_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(faber_krahn_gap, m)?)?;
    Ok(())
}
