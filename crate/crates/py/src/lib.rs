//! Python bindings: orbitals, requests, evaluation, batch evaluation, the
//! auxiliary functions and the verification suite.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stoint::afunc::{a_closed as a_closed_rs, AArgs};
use stoint::bfunc::{b_series as b_series_rs, DEFAULT_SERIES_TOL};
use stoint::verify::{run_all, Grid};
use stoint::{EvalConfig, Error};

create_exception!(stoint_py, ConvergenceError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidQuantumNumbers { .. }
        | Error::InvalidExponent { .. }
        | Error::InvalidDistance(_)
        | Error::Domain { .. }
        | Error::InvalidConfig(_) => PyValueError::new_err(e.to_string()),
        Error::SeriesNotConverged { .. } | Error::QuadratureNotConverged { .. } | Error::NotConverged { .. } => {
            ConvergenceError::new_err(e.to_string())
        }
        Error::Inconsistent(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Normalized Slater-type orbital `(n, l, m, delta)`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct SlaterOrbital {
    inner: stoint::SlaterOrbital,
}

#[pymethods]
impl SlaterOrbital {
    #[new]
    fn new(n: u32, l: u32, m: i32, delta: f64) -> PyResult<Self> {
        let inner = stoint::SlaterOrbital::new(n, l, m, delta);
        inner.validate(1).map_err(to_py)?;
        Ok(SlaterOrbital { inner })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn l(&self) -> u32 {
        self.inner.l
    }

    #[getter]
    fn m(&self) -> i32 {
        self.inner.m
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn __repr__(&self) -> String {
        let o = self.inner;
        format!("SlaterOrbital({}, {}, {}, {})", o.n, o.l, o.m, o.delta)
    }
}

/// Integral class plus four orbitals and the internuclear distance.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct IntegralRequest {
    inner: stoint::IntegralRequest,
}

#[pymethods]
impl IntegralRequest {
    #[new]
    fn new(class: &str, orbitals: [SlaterOrbital; 4], distance: f64) -> PyResult<Self> {
        let class: stoint::IntegralClass = class.parse().map_err(to_py)?;
        let inner = stoint::IntegralRequest::new(class, orbitals.map(|o| o.inner), distance);
        inner.validate().map_err(to_py)?;
        Ok(IntegralRequest { inner })
    }

    #[getter]
    fn class(&self) -> &'static str {
        self.inner.class.name()
    }

    #[getter]
    fn orbitals(&self) -> Vec<SlaterOrbital> {
        self.inner.orbitals.iter().map(|&inner| SlaterOrbital { inner }).collect()
    }

    #[getter]
    fn distance(&self) -> f64 {
        self.inner.distance
    }

    /// `m2 + m4`, the order of the associated Legendre functions.
    #[getter]
    fn sigma(&self) -> i32 {
        self.inner.sigma()
    }

    fn __repr__(&self) -> String {
        let os: Vec<String> = self.orbitals().iter().map(|o| o.__repr__()).collect();
        format!("IntegralRequest({:?}, [{}], {})", self.class(), os.join(", "), self.distance())
    }
}

#[pyclass(frozen, get_all)]
struct IntegralResult {
    value: f64,
    mu_used: u32,
    terms_evaluated: usize,
    truncation_estimate: f64,
    zero_by_selection: bool,
}

#[pymethods]
impl IntegralResult {
    fn __repr__(&self) -> String {
        format!(
            "IntegralResult(value={:e}, mu_used={}, terms_evaluated={}, truncation_estimate={:e}, zero_by_selection={})",
            self.value,
            self.mu_used,
            self.terms_evaluated,
            self.truncation_estimate,
            if self.zero_by_selection { "True" } else { "False" }
        )
    }
}

impl From<stoint::IntegralResult> for IntegralResult {
    fn from(r: stoint::IntegralResult) -> Self {
        IntegralResult {
            value: r.value,
            mu_used: r.mu_used,
            terms_evaluated: r.terms_evaluated,
            truncation_estimate: r.truncation_estimate,
            zero_by_selection: r.zero_by_selection,
        }
    }
}

fn config(mu_tol: Option<f64>, series_tol: Option<f64>, mu_cap: Option<u32>) -> PyResult<EvalConfig> {
    let mut cfg = EvalConfig::default();
    if let Some(t) = mu_tol {
        cfg.mu_tol = t;
    }
    if let Some(t) = series_tol {
        cfg.series_tol = t;
    }
    if let Some(c) = mu_cap {
        cfg.mu_cap = c;
    }
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

#[pyfunction]
#[pyo3(signature = (request, mu_tol=None, series_tol=None, mu_cap=None))]
fn evaluate(
    py: Python<'_>,
    request: IntegralRequest,
    mu_tol: Option<f64>,
    series_tol: Option<f64>,
    mu_cap: Option<u32>,
) -> PyResult<IntegralResult> {
    let cfg = config(mu_tol, series_tol, mu_cap)?;
    py.detach(|| stoint::evaluate(&request.inner, &cfg)).map(Into::into).map_err(to_py)
}

/// Evaluate many requests in parallel; results keep the input order and a
/// failed case raises.
#[pyfunction]
#[pyo3(signature = (requests, workers=None, mu_tol=None))]
fn evaluate_batch(
    py: Python<'_>,
    requests: Vec<IntegralRequest>,
    workers: Option<usize>,
    mu_tol: Option<f64>,
) -> PyResult<Vec<IntegralResult>> {
    let cfg = config(mu_tol, None, None)?;
    let reqs: Vec<_> = requests.iter().map(|r| r.inner).collect();
    let out = py.detach(|| match workers {
        Some(w) => stoint::engine::evaluate_batch_with_workers(&reqs, &cfg, w),
        None => Ok(stoint::evaluate_batch(&reqs, &cfg)),
    });
    out.map_err(to_py)?.into_iter().map(|r| r.map(Into::into).map_err(to_py)).collect()
}

/// `B_mu^g(beta)` for `|sigma| = sigma`.
#[pyfunction]
#[pyo3(signature = (mu, g, beta, sigma=0))]
fn b_series(mu: u32, g: u32, beta: f64, sigma: u32) -> PyResult<f64> {
    b_series_rs(mu, g, beta, sigma, DEFAULT_SERIES_TOL).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, r1, r2, alpha1, alpha2, sigma=0))]
fn a_closed(mu: u32, r1: u32, r2: u32, alpha1: f64, alpha2: f64, sigma: u32) -> PyResult<f64> {
    a_closed_rs(&AArgs::new(mu, r1, r2, alpha1, alpha2, sigma)).map_err(to_py)
}

/// Run the verification suite; returns `(name, passed, worst, tolerance)` rows.
#[pyfunction]
#[pyo3(signature = (grid="small"))]
fn verify(py: Python<'_>, grid: &str) -> PyResult<Vec<(String, bool, f64, f64)>> {
    let grid: Grid = grid.parse().map_err(to_py)?;
    let reports = py.detach(|| run_all(grid, Default::default()));
    Ok(reports.into_iter().map(|r| (r.name.to_string(), r.passed, r.worst, r.tolerance)).collect())
}

#[pymodule]
fn stoint_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SlaterOrbital>()?;
    m.add_class::<IntegralRequest>()?;
    m.add_class::<IntegralResult>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_batch, m)?)?;
    m.add_function(wrap_pyfunction!(b_series, m)?)?;
    m.add_function(wrap_pyfunction!(a_closed, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    Ok(())
}
