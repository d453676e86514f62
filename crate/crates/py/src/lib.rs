//! Python bindings for `sso-core`.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sso_core::cli_io::config::{DomainChoice, Resolution, SolverSettings};
use sso_core::cli_io::{parse_config, run_subcommand, solve_spec, write_tables, Format, Subcommand};
use sso_core::observables::{level_spacings, moments};
use sso_core::{semiclassics, Error, PotentialSpec, WkbConfig};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        3 => PyRuntimeError::new_err(msg),
        4 => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

/// A potential family with its parameters.
#[pyclass(name = "Potential", module = "sso", frozen)]
struct PyPotential {
    spec: PotentialSpec,
}

fn checked(spec: PotentialSpec) -> PyResult<PyPotential> {
    spec.validate().map_err(to_py)?;
    Ok(PyPotential { spec })
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn sep_raw(alpha: f64) -> PyResult<Self> {
        checked(PotentialSpec::sep_raw(alpha))
    }

    #[staticmethod]
    fn sep_shifted(alpha: f64) -> PyResult<Self> {
        checked(PotentialSpec::sep_shifted(alpha))
    }

    #[staticmethod]
    fn sep_modified(alpha: f64) -> PyResult<Self> {
        checked(PotentialSpec::sep_modified(alpha))
    }

    #[staticmethod]
    fn skewed(alpha: f64, delta: f64) -> PyResult<Self> {
        checked(PotentialSpec::skewed(alpha, delta))
    }

    #[staticmethod]
    fn power_law(alpha: f64, beta: f64) -> PyResult<Self> {
        checked(PotentialSpec::power_law(alpha, beta))
    }

    #[staticmethod]
    fn harmonic() -> Self {
        PyPotential {
            spec: PotentialSpec::harmonic(),
        }
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.spec.family.name()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    fn value(&self, q: f64) -> PyResult<f64> {
        sso_core::evaluate(&self.spec, q).map_err(to_py)
    }

    fn values(&self, qs: Vec<f64>) -> PyResult<Vec<f64>> {
        qs.into_iter().map(|q| self.value(q)).collect()
    }

    /// `q_min, q_max, q_v, v_max, v_v` of the shifted SEP.
    fn landmarks<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let lm = sso_core::landmarks(&self.spec).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("q_min", lm.q_min)?;
        d.set_item("q_max", lm.q_max)?;
        d.set_item("q_v", lm.q_v)?;
        d.set_item("v_max", lm.v_max)?;
        d.set_item("v_v", lm.v_v)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Potential({}, alpha={})", self.spec.family, self.spec.alpha)
    }
}

/// Lowest eigenpairs on a uniform grid; states satisfy `h Σ ψ² = 1`.
#[pyclass(name = "Solution", module = "sso", frozen)]
struct PySolution {
    #[pyo3(get)]
    energies: Vec<f64>,
    #[pyo3(get)]
    states: Vec<Vec<f64>>,
    #[pyo3(get)]
    residuals: Vec<f64>,
    #[pyo3(get)]
    q: Vec<f64>,
    #[pyo3(get)]
    h: f64,
    grid: sso_core::Grid,
}

#[pymethods]
impl PySolution {
    fn __len__(&self) -> usize {
        self.energies.len()
    }

    /// `(mu, [m_0, ..., m_max_order])` for state `n`.
    #[pyo3(signature = (n, max_order = 9))]
    fn moments(&self, n: usize, max_order: usize) -> PyResult<(f64, Vec<f64>)> {
        let psi = self
            .states
            .get(n)
            .ok_or_else(|| PyValueError::new_err(format!("state {n} was not computed")))?;
        let r = moments(psi, &self.grid, max_order).map_err(to_py)?;
        Ok((r.mu, r.central_moments))
    }

    fn nodes(&self, n: usize) -> PyResult<usize> {
        self.states
            .get(n)
            .map(|psi| sso_core::node_count(psi))
            .ok_or_else(|| PyValueError::new_err(format!("state {n} was not computed")))
    }
}

/// Solves for the `k` lowest levels. Without `domain` the box and spacing are
/// chosen automatically; `n_points` or `h` fix the resolution.
#[pyfunction]
#[pyo3(signature = (potential, k, *, domain = None, n_points = None, h = None, hbar = 1.0, mass = 1.0, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    potential: &PyPotential,
    k: usize,
    domain: Option<(f64, f64)>,
    n_points: Option<usize>,
    h: Option<f64>,
    hbar: f64,
    mass: f64,
    tol: f64,
) -> PyResult<PySolution> {
    let settings = SolverSettings {
        hbar,
        mass,
        k_states: k,
        tol,
        domain: match domain {
            Some((lo, hi)) => DomainChoice::Fixed { lo, hi },
            None => DomainChoice::Auto,
        },
        resolution: match (n_points, h) {
            (Some(_), Some(_)) => return Err(PyValueError::new_err("give at most one of n_points and h")),
            (Some(n), None) => Resolution::Points(n),
            (None, Some(h)) => Resolution::Spacing(h),
            (None, None) => Resolution::Auto,
        },
        ..SolverSettings::default()
    };
    let spec = potential.spec;
    let sol = py.detach(|| solve_spec(&spec, &settings, k)).map_err(to_py)?;
    Ok(PySolution {
        q: sol.grid.points(),
        h: sol.grid.h,
        grid: sol.grid,
        energies: sol.energies,
        states: sol.states,
        residuals: sol.residuals,
    })
}

/// `(spacings, scaled_spacings)` with `None` where undefined.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn spacings(energies: Vec<f64>) -> PyResult<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    level_spacings(&energies).map_err(to_py)
}

#[pyfunction]
fn count_bound(energies: Vec<f64>, v_max: f64) -> usize {
    sso_core::count_bound(&energies, v_max)
}

#[pyfunction]
fn turning_points(potential: &PyPotential, energy: f64) -> PyResult<(f64, f64)> {
    sso_core::turning_points(&potential.spec, energy).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (potential, energy, mass = 1.0))]
fn action(potential: &PyPotential, energy: f64, mass: f64) -> PyResult<f64> {
    sso_core::action_integral(&potential.spec, energy, mass).map_err(to_py)
}

/// `(period, q1, q2)`
#[pyfunction]
#[pyo3(signature = (potential, energy, mass = 1.0))]
fn classical_period(potential: &PyPotential, energy: f64, mass: f64) -> PyResult<(f64, f64, f64)> {
    let r = sso_core::classical_period(&potential.spec, energy, mass).map_err(to_py)?;
    Ok((r.period, r.q1, r.q2))
}

/// Lowest `count` WKB levels; fewer when the well holds fewer.
#[pyfunction]
#[pyo3(signature = (potential, count, *, maslov_offset = 0.5, hbar = 1.0, mass = 1.0))]
fn wkb_levels(potential: &PyPotential, count: usize, maslov_offset: f64, hbar: f64, mass: f64) -> PyResult<Vec<f64>> {
    let cfg = WkbConfig {
        maslov_offset,
        hbar,
        ..WkbConfig::default()
    };
    semiclassics::wkb_levels(&potential.spec, count, &cfg, mass)
        .map(|s| s.energies)
        .map_err(to_py)
}

#[pyfunction]
fn powerlaw_wkb_closed_form(n: usize, beta: f64) -> f64 {
    sso_core::powerlaw_wkb_closed_form(n, beta)
}

/// Runs a subcommand on configuration text. Returns `{table name: (columns, rows)}`,
/// or the written paths when `out` is given.
#[pyfunction]
#[pyo3(signature = (subcommand, config, out = None, format = "csv"))]
fn run<'py>(
    py: Python<'py>,
    subcommand: &str,
    config: &str,
    out: Option<PathBuf>,
    format: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cmd: Subcommand = subcommand.parse().map_err(to_py)?;
    let mut cfg = parse_config(config).map_err(to_py)?;
    let tables = py.detach(|| run_subcommand(&cfg, cmd)).map_err(to_py)?;
    if let Some(dir) = out {
        cfg.output.directory = dir;
        cfg.output.format = format.parse::<Format>().map_err(to_py)?;
        let paths = write_tables(&cfg.output.directory, &tables, cfg.output.format, cfg.output.precision)
            .map_err(to_py)?;
        return Ok(paths.into_pyobject(py)?.into_any());
    }
    let d = PyDict::new(py);
    for t in tables {
        let cols: Vec<String> = t.column_names().into_iter().map(String::from).collect();
        d.set_item(&t.name, (cols, t.rows))?;
    }
    Ok(d.into_any())
}

#[pymodule]
fn sso(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(spacings, m)?)?;
    m.add_function(wrap_pyfunction!(count_bound, m)?)?;
    m.add_function(wrap_pyfunction!(turning_points, m)?)?;
    m.add_function(wrap_pyfunction!(action, m)?)?;
    m.add_function(wrap_pyfunction!(classical_period, m)?)?;
    m.add_function(wrap_pyfunction!(wkb_levels, m)?)?;
    m.add_function(wrap_pyfunction!(powerlaw_wkb_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
