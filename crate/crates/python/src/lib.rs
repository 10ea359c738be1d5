//! Python access to the report builders. Every function returns the same
//! structure the command-line tool writes as JSON, as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use curvecft::classgroup::Orientation;
use curvecft::curve::{Curve, CurveRecord};
use curvecft::divisor::Divisor;
use curvecft::experiment::{self, BoundsConfig, CurveSession, ExperimentConfig, ModulusShape};
use curvecft::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InsufficientBounds(_) | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn session(curve: &str) -> PyResult<CurveSession> {
    let rec = CurveRecord::parse(curve).map_err(py_err)?;
    CurveSession::new(&rec.to_string(), &rec, &BoundsConfig::default()).map_err(py_err)
}

/// Zeta report of a curve given as "{q: 3, f: [...]}".
#[pyfunction]
#[pyo3(signature = (curve, tolerance = 1e-9))]
fn zeta(py: Python<'_>, curve: &str, tolerance: f64) -> PyResult<Py<PyAny>> {
    let c = Curve::from_record(&CurveRecord::parse(curve).map_err(py_err)?).map_err(py_err)?;
    to_py(py, &experiment::zeta_report(&c, tolerance).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (curve, max_degree = 2, list_up_to = 2))]
fn places(py: Python<'_>, curve: &str, max_degree: u32, list_up_to: u32) -> PyResult<Py<PyAny>> {
    let c = Curve::from_record(&CurveRecord::parse(curve).map_err(py_err)?).map_err(py_err)?;
    to_py(
        py,
        &experiment::places_report(&c, max_degree.max(1), list_up_to).map_err(py_err)?,
    )
}

#[pyfunction]
fn rayclass(py: Python<'_>, curve: &str, modulus: &str) -> PyResult<Py<PyAny>> {
    let s = session(curve)?;
    let d = Divisor::parse(&s.curve, modulus).map_err(py_err)?;
    to_py(
        py,
        &experiment::rayclass_report(s.groups(), &d).map_err(py_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (curve, modulus, order = 3, truncation = None, tolerance = 1e-9))]
fn lseries(
    py: Python<'_>,
    curve: &str,
    modulus: &str,
    order: u32,
    truncation: Option<usize>,
    tolerance: f64,
) -> PyResult<Py<PyAny>> {
    if order == 0 {
        return Err(PyValueError::new_err("order must be positive"));
    }
    let s = session(curve)?;
    let d = Divisor::parse(&s.curve, modulus).map_err(py_err)?;
    let r =
        experiment::lseries_report(&s.engine, &d, order, truncation, tolerance).map_err(py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (first, second, shape = vec![2, 1, 1], place_degree = 2, order = 3))]
fn compare(
    py: Python<'_>,
    first: &str,
    second: &str,
    shape: Vec<i64>,
    place_degree: u32,
    order: u32,
) -> PyResult<Py<PyAny>> {
    let shape = ModulusShape {
        multiplicities: shape,
        place_degree,
        expected_count: None,
    };
    let r =
        experiment::compare(&session(first)?, &session(second)?, &shape, order).map_err(py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (curve, modulus, samples = 100, seed = 0, inverse = false))]
fn dynsys_check(
    py: Python<'_>,
    curve: &str,
    modulus: &str,
    samples: usize,
    seed: u64,
    inverse: bool,
) -> PyResult<Py<PyAny>> {
    let s = session(curve)?;
    let d = Divisor::parse(&s.curve, modulus).map_err(py_err)?;
    let o = if inverse {
        Orientation::Inverse
    } else {
        Orientation::Place
    };
    to_py(
        py,
        &experiment::dynsys_report(s.groups(), &d, o, samples, seed).map_err(py_err)?,
    )
}

/// Runs the cover experiment; `config` is TOML text, empty for the defaults.
#[pyfunction]
#[pyo3(signature = (config = ""))]
fn covers_experiment(py: Python<'_>, config: &str) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig::from_toml(config).map_err(py_err)?;
    let r = py
        .detach(|| experiment::run_experiment(&cfg))
        .map_err(py_err)?;
    to_py(py, &r)
}

#[pymodule]
fn curvecft_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(places, m)?)?;
    m.add_function(wrap_pyfunction!(rayclass, m)?)?;
    m.add_function(wrap_pyfunction!(lseries, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(dynsys_check, m)?)?;
    m.add_function(wrap_pyfunction!(covers_experiment, m)?)?;
    Ok(())
}
