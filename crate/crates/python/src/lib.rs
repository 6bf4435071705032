//! Python bindings: moduli, Φ and the closed-form tensors, the
//! verification suite and the reduced flow.
//!
//! Long-running calls release the GIL.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hopf_crf::diagnostics::MonitorRecord;
use hopf_crf::flow::{self, FlowControl, GridSpec, InitialData, InitialFamily};
use hopf_crf::tensors::PointTensors;
use hopf_crf::verify::{self, VerifyConfig};
use hopf_crf::{AmbientPoint, Error, Hermitian2, HessianVariant, HopfModuli};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidModuli { .. }
        | Error::Origin
        | Error::BeyondMaximalTime { .. }
        | Error::Grid(_)
        | Error::ConfigRange { .. }
        | Error::ConfigParse { .. }
        | Error::Inadmissible(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Moduli `(|α|, |β|)` of a class-1 primary Hopf surface, `1 < |α| <= |β|`.
#[pyclass(name = "Moduli", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModuli(HopfModuli);

#[pymethods]
impl PyModuli {
    #[new]
    fn new(abs_alpha: f64, abs_beta: f64) -> PyResult<Self> {
        HopfModuli::new(abs_alpha, abs_beta).map(PyModuli).map_err(py_err)
    }

    /// The standard surface `|α| = |β| = 2`.
    #[staticmethod]
    fn round() -> Self {
        PyModuli(HopfModuli::round())
    }

    #[getter]
    fn abs_alpha(&self) -> f64 {
        self.0.abs_alpha
    }

    #[getter]
    fn abs_beta(&self) -> f64 {
        self.0.abs_beta
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.0.k1
    }

    #[getter]
    fn k2(&self) -> f64 {
        self.0.k2
    }

    /// `log(|α||β|)`.
    #[getter]
    fn period(&self) -> f64 {
        self.0.period
    }

    /// `π² L / (2 k1 k2)`.
    fn reference_volume(&self) -> f64 {
        hopf_crf::diagnostics::exact_reference_volume(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Moduli({}, {})", self.0.abs_alpha, self.0.abs_beta)
    }
}

fn point(z1: Complex64, z2: Complex64) -> PyResult<AmbientPoint> {
    AmbientPoint::new(z1, z2).map_err(py_err)
}

#[pyfunction]
fn solve_phi(m: &PyModuli, z1: Complex64, z2: Complex64) -> PyResult<f64> {
    hopf_crf::solve_phi(&m.0, &point(z1, z2)?).map_err(py_err)
}

#[pyfunction]
fn z_function(m: &PyModuli, z1: Complex64, z2: Complex64) -> PyResult<f64> {
    hopf_crf::z_function(&m.0, &point(z1, z2)?).map_err(py_err)
}

fn matrix(h: &Hermitian2) -> [[Complex64; 2]; 2] {
    [[h.entry(0, 0), h.entry(0, 1)], [h.entry(1, 0), h.entry(1, 1)]]
}

/// ω̂, Θ, χ, Ric(χ) and `∂∂̄Φ` at a point, as 2×2 nested lists.
#[pyfunction]
#[pyo3(signature = (m, z1, z2, variant = "corrected"))]
fn tensors<'py>(
    py: Python<'py>,
    m: &PyModuli,
    z1: Complex64,
    z2: Complex64,
    variant: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let variant: HessianVariant = parse(variant)?;
    let t = PointTensors::evaluate(&m.0, &point(z1, z2)?, variant).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("phi", t.data.phi)?;
    d.set_item("z", t.z)?;
    d.set_item("hat", matrix(&t.hat))?;
    d.set_item("theta", matrix(&t.theta))?;
    d.set_item("chi", matrix(&t.chi))?;
    d.set_item("ricci_chi", matrix(&t.ricci_chi()))?;
    d.set_item("phi_hessian", matrix(&t.hessian))?;
    d.set_item("phi_gradient", [t.grad.d1, t.grad.d2])?;
    Ok(d)
}

/// Run every identity check; one dict per check.
#[pyfunction]
#[pyo3(signature = (m, samples = 1000, fd_samples = 100, seed = 42, variant = "corrected"))]
fn verify_suite<'py>(
    py: Python<'py>,
    m: &PyModuli,
    samples: usize,
    fd_samples: usize,
    seed: u64,
    variant: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = VerifyConfig { samples, fd_samples, seed, variant: parse(variant)?, ..Default::default() };
    let moduli = m.0;
    let reports = py.detach(|| verify::run_suite(&moduli, &cfg)).map_err(py_err)?;
    reports
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("name", &r.name)?;
            d.set_item("samples", r.samples)?;
            d.set_item("max_residual", r.max_residual)?;
            d.set_item("tolerance", r.tolerance)?;
            d.set_item("pass", r.pass)?;
            d.set_item("expected_pass", r.expected == verify::Expectation::Pass)?;
            d.set_item("ok", r.ok())?;
            d.set_item("notes", &r.notes)?;
            Ok(d)
        })
        .collect()
}

fn record_dict<'py>(py: Python<'py>, r: &MonitorRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in MonitorRecord::HEADER.iter().zip(r.values()) {
        d.set_item(*k, v)?;
    }
    Ok(d)
}

/// Result of [`run_flow`]: monitor records, the final potential and step counts.
#[pyclass(name = "FlowResult", frozen)]
struct PyFlowResult {
    records: Vec<MonitorRecord>,
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    n_u: usize,
    #[pyo3(get)]
    n_sigma: usize,
    #[pyo3(get)]
    phi: Vec<f64>,
    #[pyo3(get)]
    steps: usize,
    #[pyo3(get)]
    rejected: usize,
}

#[pymethods]
impl PyFlowResult {
    /// One dict per monitor time, keyed by the time-series column names.
    #[getter]
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.records.iter().map(|r| record_dict(py, r)).collect()
    }

    /// Column names, in order.
    #[staticmethod]
    fn columns() -> Vec<&'static str> {
        MonitorRecord::HEADER.to_vec()
    }
}

/// Integrate the reduced flow from zero or cos-bump data.
#[pyfunction]
#[pyo3(signature = (m, n_u = 32, n_sigma = 32, t_max = 0.49, initial = "zero", epsilon = 0.0, cfl = 0.2, monitor_cadence = 0.01))]
#[allow(clippy::too_many_arguments)]
fn run_flow(
    py: Python<'_>,
    m: &PyModuli,
    n_u: usize,
    n_sigma: usize,
    t_max: f64,
    initial: &str,
    epsilon: f64,
    cfl: f64,
    monitor_cadence: f64,
) -> PyResult<PyFlowResult> {
    let data = match parse::<InitialFamily>(initial)? {
        InitialFamily::Zero => InitialData::zero(),
        InitialFamily::CosBump => InitialData::cos_bump(epsilon),
        InitialFamily::File => return Err(PyValueError::new_err("file initial data is only available from the CLI")),
    };
    let moduli = m.0;
    let grid = GridSpec::for_moduli(&moduli, n_u, n_sigma).map_err(py_err)?;
    let control = FlowControl { t_max, cfl, monitor_cadence, ..Default::default() };
    let (records, summary) = py.detach(|| flow::run_flow(&moduli, &grid, &data, &control)).map_err(py_err)?;
    Ok(PyFlowResult {
        records,
        t: summary.state.t,
        n_u,
        n_sigma,
        phi: summary.state.phi,
        steps: summary.steps,
        rejected: summary.rejected,
    })
}

/// Spatially constant solution on the round surface from zero data.
#[pyfunction]
fn exact_round_potential(t: f64) -> PyResult<f64> {
    flow::exact_round_potential(t).map_err(py_err)
}

#[pymodule]
pub fn pyhopf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModuli>()?;
    m.add_class::<PyFlowResult>()?;
    m.add_function(wrap_pyfunction!(solve_phi, m)?)?;
    m.add_function(wrap_pyfunction!(z_function, m)?)?;
    m.add_function(wrap_pyfunction!(tensors, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_flow, m)?)?;
    m.add_function(wrap_pyfunction!(exact_round_potential, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
