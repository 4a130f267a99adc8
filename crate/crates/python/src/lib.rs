//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rkf_core::bounds::{self, ComparatorTotals};
use rkf_core::experiment::{self, SelftestOptions, SummaryRow};
use rkf_core::linops::{Matrix, Vector};
use rkf_core::{filter, model, riccati, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Io { .. } | Error::InvalidModel(_) | Error::Dimension(_) | Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows differ in length"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Matrix::from_row_slice(nrows, ncols, &flat))
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn summary_dict<'py>(py: Python<'py>, r: &SummaryRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("L", r.l_t)?;
    d.set_item("V", r.v_t)?;
    d.set_item("W", r.w_t)?;
    d.set_item("B1", r.b1)?;
    d.set_item("B3", r.b3)?;
    d.set_item("avg_gap", r.avg_loss_gap)?;
    Ok(d)
}

/// Linear system `x_{t+1} = A x_t + w_t`, `y_t = C x_t + v_t` with weights `Q`, `V`.
#[pyclass(name = "SystemModel", module = "rkf", frozen)]
struct PySystemModel {
    inner: model::SystemModel,
}

#[pymethods]
impl PySystemModel {
    #[new]
    fn new(a: Vec<Vec<f64>>, c: Vec<Vec<f64>>, q: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = model::SystemModel::new(matrix(a)?, matrix(c)?, matrix(q)?, matrix(v)?).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        rows(self.inner.a())
    }

    #[getter]
    fn c(&self) -> Vec<Vec<f64>> {
        rows(self.inner.c())
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        rows(self.inner.q())
    }

    #[getter]
    fn v(&self) -> Vec<Vec<f64>> {
        rows(self.inner.v())
    }

    /// Structural flags; raises ValueError if Q or V is not positive definite.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.validate().map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("detectable", r.detectable)?;
        d.set_item("stabilizable", r.stabilizable)?;
        d.set_item("a_nonsingular", r.a_nonsingular)?;
        d.set_item("controllable_aq", r.controllable_aq)?;
        Ok(d)
    }

    fn to_config_text(&self) -> String {
        self.inner.to_config_text()
    }

    fn __repr__(&self) -> String {
        format!("SystemModel(n={}, p={})", self.inner.n(), self.inner.p())
    }
}

#[pyfunction]
fn random_stable_system(n: usize, p: usize, seed: u64) -> PyResult<PySystemModel> {
    let inner = model::random_stable_system(n, p, seed).map_err(to_py_err)?;
    Ok(PySystemModel { inner })
}

#[pyfunction]
#[pyo3(signature = (model, tol = riccati::DEFAULT_TOL, max_iter = riccati::DEFAULT_MAX_ITER))]
fn solve_dare<'py>(py: Python<'py>, model: &PySystemModel, tol: f64, max_iter: usize) -> PyResult<Bound<'py, PyDict>> {
    let s = riccati::solve_dare(&model.inner, tol, max_iter).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("sigma", rows(&s.sigma_ss))?;
    d.set_item("gain", rows(&s.k_ss))?;
    d.set_item("h", rows(&s.h))?;
    d.set_item("sigma_h", s.sigma_h)?;
    d.set_item("rho_h", s.rho_h)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("residual", s.residual)?;
    Ok(d)
}

/// `σ̄(Σ_k − Σ)` for `k = 0..=t_max`, starting from `Σ₀ = I`.
#[pyfunction]
fn convergence_trace(model: &PySystemModel, t_max: usize) -> PyResult<Vec<f64>> {
    riccati::convergence_trace(&model.inner, t_max).map_err(to_py_err)
}

/// Runs the filter from `x̂₀ = 0`, `Σ₀ = I` over a list of observations.
#[pyfunction]
fn run_filter<'py>(py: Python<'py>, model: &PySystemModel, observations: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let obs: Vec<Vector> = observations.into_iter().map(Vector::from_vec).collect();
    let (state, records) = filter::run(&model.inner, &obs).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("xhat", state.xhat.as_slice().to_vec())?;
    d.set_item("sigma", rows(&state.sigma))?;
    d.set_item("cum_loss", state.cum_loss)?;
    d.set_item("losses", records.iter().map(|r| r.loss).collect::<Vec<_>>())?;
    d.set_item(
        "predictions",
        records.iter().map(|r| r.yhat.as_slice().to_vec()).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pyfunction]
fn bound_constants<'py>(py: Python<'py>, model: &PySystemModel) -> PyResult<Bound<'py, PyDict>> {
    let ss = riccati::solve_dare_default(&model.inner).map_err(to_py_err)?;
    let k = bounds::constants(&model.inner, &ss).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("r_bar", k.r_bar)?;
    d.set_item("a", k.a)?;
    d.set_item("b", k.b)?;
    d.set_item("c", k.c)?;
    d.set_item("sigma_kk", k.sigma_kk)?;
    d.set_item("sigma_qinv", k.sigma_qinv)?;
    Ok(d)
}

/// Both bounds for given comparator totals; `B1` is NaN when not applicable.
#[pyfunction]
#[pyo3(signature = (model, v_t, w_t, xbar0_normsq = 0.0, l_t = 0.0))]
fn certify<'py>(
    py: Python<'py>,
    model: &PySystemModel,
    v_t: f64,
    w_t: f64,
    xbar0_normsq: f64,
    l_t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let ss = riccati::solve_dare_default(&model.inner).map_err(to_py_err)?;
    let k = bounds::constants(&model.inner, &ss).map_err(to_py_err)?;
    let totals = ComparatorTotals {
        v_t,
        w_t,
        xbar0_normsq,
    };
    let r = bounds::certify(&k, &totals, l_t);
    let d = PyDict::new(py);
    d.set_item("B1", r.b1)?;
    d.set_item("B3", r.b3)?;
    d.set_item("alpha_b1", r.alpha_b1)?;
    d.set_item("alpha_b3", r.alpha_b3)?;
    d.set_item("b1_applicable", r.applicable_b1)?;
    Ok(d)
}

/// Runs an experiment from config text and returns its CSV rows as dicts.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_text: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = experiment::parse_config(config_text).map_err(to_py_err)?;
    let rows = experiment::run_experiment(&cfg).map_err(to_py_err)?;
    rows.iter().map(|r| summary_dict(py, r)).collect()
}

#[pyfunction]
fn run_config_file<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = experiment::load_config(&path).map_err(to_py_err)?;
    let rows = experiment::run_experiment(&cfg).map_err(to_py_err)?;
    rows.iter().map(|r| summary_dict(py, r)).collect()
}

/// Returns `(passed, [(name, passed, detail), ...])`.
#[pyfunction]
fn selftest() -> (bool, Vec<(String, bool, String)>) {
    let r = experiment::selftest(SelftestOptions::default());
    let checks = r.checks.iter().map(|c| (c.name.to_owned(), c.passed, c.detail.clone())).collect();
    (r.passed(), checks)
}

#[pymodule]
fn rkf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemModel>()?;
    m.add_function(wrap_pyfunction!(random_stable_system, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dare, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_trace, m)?)?;
    m.add_function(wrap_pyfunction!(run_filter, m)?)?;
    m.add_function(wrap_pyfunction!(bound_constants, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_config_file, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
