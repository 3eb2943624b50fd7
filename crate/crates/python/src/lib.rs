//! Python bindings for `cisolve`.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cisolve::config::parse_config;
use cisolve::diagnostics as diag;
use cisolve::integrate::{run_simulation, TimeControls};
use cisolve::io;
use cisolve::model::symbol;
use cisolve::model::{PressureLaw, State as CoreState};
use cisolve::schemes::{SchemeConfig, SchemeKind};
use cisolve::spectral::{self, Grid, ScalarField, VectorField};
use cisolve::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::TwinFailure { .. } | Error::NonFinite(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn field(grid: &Grid, values: Vec<f64>) -> PyResult<ScalarField> {
    ScalarField::new(grid, values).map_err(to_py)
}

/// Solver state on the periodic square.
#[pyclass(name = "State", module = "pycisolve", from_py_object)]
#[derive(Clone)]
pub struct PyState {
    inner: CoreState,
}

#[pymethods]
impl PyState {
    /// Builds a state from the physical density and velocity given as
    /// row-major lists of length `n * n`; `rho_bar` defaults to the mean.
    #[new]
    #[pyo3(signature = (n, rho, vx, vy, rho_bar=None, length=std::f64::consts::TAU))]
    fn new(n: usize, rho: Vec<f64>, vx: Vec<f64>, vy: Vec<f64>, rho_bar: Option<f64>, length: f64) -> PyResult<Self> {
        let grid = Grid::new(n, length).map_err(to_py)?;
        let rho = field(&grid, rho)?;
        let v = VectorField::new([field(&grid, vx)?, field(&grid, vy)?]).map_err(to_py)?;
        Ok(PyState {
            inner: CoreState::from_physical(&rho, v, rho_bar).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid().n()
    }

    #[getter]
    fn rho_bar(&self) -> f64 {
        self.inner.rho_bar
    }

    #[getter]
    fn rho_tilde(&self) -> Vec<f64> {
        self.inner.rho_tilde.values().to_vec()
    }

    #[getter]
    fn density(&self) -> Vec<f64> {
        self.inner.density().into_values()
    }

    #[getter]
    fn velocity(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.inner.v.component(0).values().to_vec(),
            self.inner.v.component(1).values().to_vec(),
        )
    }

    #[getter]
    fn p_tilde(&self) -> Option<Vec<f64>> {
        self.inner.p_tilde.as_ref().map(|p| p.values().to_vec())
    }

    fn min_density(&self) -> f64 {
        self.inner.min_density()
    }

    #[pyo3(signature = (s=3.0))]
    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        self.inner.sobolev_norm(s).map_err(to_py)
    }

    fn divergence_norm(&self) -> f64 {
        spectral::divergence(&self.inner.v).norm()
    }

    fn distance(&self, other: &PyState) -> f64 {
        self.inner.l2_distance(&other.inner)
    }

    #[pyo3(signature = (path, time=0.0))]
    fn write_dump(&self, path: PathBuf, time: f64) -> PyResult<()> {
        io::write_field_dump(&self.inner, time, &path).map_err(to_py)
    }

    /// Reads a field dump; returns `(state, time)`.
    #[staticmethod]
    #[pyo3(signature = (path, length=std::f64::consts::TAU))]
    fn read_dump(path: PathBuf, length: f64) -> PyResult<(PyState, f64)> {
        let d = io::read_field_dump_with_length(&path, length).map_err(to_py)?;
        Ok((PyState { inner: d.state }, d.time))
    }

    fn __repr__(&self) -> String {
        format!(
            "State(n={}, rho_bar={}, ncomp={})",
            self.inner.grid().n(),
            self.inner.rho_bar,
            self.inner.ncomp()
        )
    }
}

/// Diagnostic history of one run.
#[pyclass(name = "RunReport", module = "pycisolve", from_py_object)]
#[derive(Clone)]
pub struct PyRunReport {
    inner: diag::RunReport,
}

#[pymethods]
impl PyRunReport {
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.label()
    }

    #[getter]
    fn eps(&self) -> Option<f64> {
        self.inner.eps
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn final_time(&self) -> f64 {
        self.inner.final_time
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn hs_norm(&self) -> Vec<f64> {
        self.inner.hs_norm.clone()
    }

    #[getter]
    fn kinetic(&self) -> Vec<f64> {
        self.inner.kinetic.clone()
    }

    #[getter]
    fn div_norm(&self) -> Vec<f64> {
        self.inner.div_norm.clone()
    }

    #[getter]
    fn penalty_norm(&self) -> Vec<f64> {
        self.inner.penalty_norm.clone()
    }

    #[getter]
    fn min_rho(&self) -> Vec<f64> {
        self.inner.min_rho.clone()
    }

    /// `None`, or `(kind, last valid time)`.
    #[getter]
    fn failure(&self) -> Option<(String, f64)> {
        self.inner.failure.map(|f| (f.kind.to_string(), f.time))
    }

    #[getter]
    fn final_state(&self) -> PyState {
        PyState {
            inner: self.inner.final_state.clone(),
        }
    }

    fn penalty_constant(&self) -> PyResult<f64> {
        let eps = self.inner.eps.unwrap_or(f64::NAN);
        diag::penalty_bound_check(&self.inner, eps).map_err(to_py)
    }

    fn to_csv(&self) -> String {
        io::diagnostics_csv(&self.inner)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        io::write_diagnostics_csv(&self.inner, &path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Parsed run configuration.
#[pyclass(name = "Config", module = "pycisolve")]
pub struct PyConfig {
    inner: cisolve::config::Config,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (text, overrides=None))]
    fn new(text: &str, overrides: Option<Vec<String>>) -> PyResult<Self> {
        Ok(PyConfig {
            inner: parse_config(text, &overrides.unwrap_or_default()).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.label()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps()
    }

    #[getter]
    fn law(&self) -> String {
        self.inner.law.to_string()
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }

    fn initial_state(&self) -> PyResult<PyState> {
        Ok(PyState {
            inner: self.inner.initial_state().map_err(to_py)?,
        })
    }

    /// Runs the configured simulation in memory, releasing the GIL.
    fn run(&self, py: Python<'_>) -> PyResult<PyRunReport> {
        let c = &self.inner;
        let report = py
            .detach(|| -> cisolve::Result<diag::RunReport> {
                let grid = c.grid()?;
                run_simulation(&c.initial_state()?, &c.scheme_config(&grid), &c.law, &c.time_controls())
            })
            .map_err(to_py)?;
        Ok(PyRunReport { inner: report })
    }
}

fn law_from(id: &str, params: Option<Vec<f64>>) -> PyResult<PressureLaw> {
    PressureLaw::from_id(id, &params.unwrap_or_default()).map_err(to_py)
}

/// Runs one scheme (`"a"`, `"b"`, `"c"` or `"oracle"`) from `state`.
#[pyfunction]
#[pyo3(signature = (state, scheme, eps, law, t_final, params=None, dt=None, cfl=0.4))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    state: &PyState,
    scheme: &str,
    eps: f64,
    law: &str,
    t_final: f64,
    params: Option<Vec<f64>>,
    dt: Option<f64>,
    cfl: f64,
) -> PyResult<PyRunReport> {
    let kind: SchemeKind = scheme.parse().map_err(to_py)?;
    let law = law_from(law, params)?;
    let mut controls = TimeControls::new(t_final);
    controls.dt_override = dt;
    controls.cfl = cfl;
    let initial = state.inner.clone();
    let report = py
        .detach(|| run_simulation(&initial, &SchemeConfig::new(kind, eps), &law, &controls))
        .map_err(to_py)?;
    Ok(PyRunReport { inner: report })
}

/// Relative `(v, rho, pressure)` distances between a Scheme A run and an
/// oracle run of the same density-only law.
#[pyfunction]
#[pyo3(signature = (general, oracle, law, params=None))]
fn oracle_compare(
    general: &PyRunReport,
    oracle: &PyRunReport,
    law: &str,
    params: Option<Vec<f64>>,
) -> PyResult<(f64, f64, f64)> {
    let d = diag::oracle_compare(&general.inner, &oracle.inner, &law_from(law, params)?).map_err(to_py)?;
    Ok((d.v_distance, d.rho_distance, d.pressure_distance))
}

/// Eigenstructure of the symbol `A(xi, u)`.
#[pyfunction]
fn analyze_symbol<'py>(py: Python<'py>, rho: f64, v: Vec<f64>, f: f64, xi: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    if v.len() != xi.len() {
        return Err(PyValueError::new_err("v and xi must have the same length"));
    }
    let a = symbol::analyze_symbol(rho, &v, f, &xi).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("closed_form", a.closed_form)?;
    let numeric: Vec<(f64, f64)> = a.numeric.iter().map(|z| (z.re, z.im)).collect();
    out.set_item("numeric", numeric)?;
    out.set_item("max_imag", a.max_imag)?;
    out.set_item("middle_multiplicity", a.middle_multiplicity)?;
    out.set_item("symmetrizer", a.symmetrizer.diag)?;
    out.set_item("hyperbolic", a.hyperbolic)?;
    Ok(out)
}

/// Leray projection of a velocity sampled on an `n x n` grid.
#[pyfunction]
#[pyo3(signature = (n, vx, vy, length=std::f64::consts::TAU))]
fn leray_project(n: usize, vx: Vec<f64>, vy: Vec<f64>, length: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = Grid::new(n, length).map_err(to_py)?;
    let v = VectorField::new([field(&grid, vx)?, field(&grid, vy)?]).map_err(to_py)?;
    let [a, b] = spectral::leray_project(&v).into_components();
    Ok((a.into_values(), b.into_values()))
}

/// `(time, hs_norm, kinetic, div_norm, penalty_norm, min_rho)`
type DiagnosticsRow = (f64, f64, f64, f64, f64, f64);

/// Reads a diagnostics CSV into a list of row tuples.
#[pyfunction]
fn read_diagnostics_csv(path: PathBuf) -> PyResult<Vec<DiagnosticsRow>> {
    Ok(io::read_diagnostics_csv(&path)
        .map_err(to_py)?
        .into_iter()
        .map(|s| (s.time, s.hs_norm, s.kinetic, s.div_norm, s.penalty_norm, s.min_rho))
        .collect())
}

#[pymodule]
fn pycisolve(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyRunReport>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_compare, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(leray_project, m)?)?;
    m.add_function(wrap_pyfunction!(read_diagnostics_csv, m)?)?;
    Ok(())
}
