//! Python bindings. Data errors raise `ValueError`, numerical breakdowns
//! raise `ArithmeticError`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclocopula::copula::{self, CopulaFamily, CopulaParams, FitOptions, DEFAULT_NU};
use cyclocopula::fbm::HurstParameter;
use cyclocopula::harness::{self, ExperimentConfig, Profile, TableFormat};
use cyclocopula::metrics::{self, MetricVariant};
use cyclocopula::regression::{self, RegressionMode, RegressionOptions};
use cyclocopula::sim::{simulate_parfbm, ErrorTerm, ParfbmConfig};
use cyclocopula::spectral;

fn to_py(e: cyclocopula::Error) -> PyErr {
    if e.is_data_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr<Err = cyclocopula::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn pairs(x: &[f64], y: &[f64]) -> PyResult<Vec<(f64, f64)>> {
    if x.len() != y.len() {
        return Err(to_py(cyclocopula::Error::LengthMismatch { left: x.len(), right: y.len() }));
    }
    Ok(x.iter().copied().zip(y.iter().copied()).collect())
}

/// Simulate a PARFBM(1) pair; returns `(x, y)`.
#[pyfunction]
#[pyo3(signature = (n, period, phi, alpha, hurst, seed=0, error_term="increment", noise_sd=1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    n: usize,
    period: usize,
    phi: f64,
    alpha: f64,
    hurst: f64,
    seed: u64,
    error_term: &str,
    noise_sd: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let mut cfg = ParfbmConfig::new(n, period, phi, alpha, HurstParameter::new(hurst).map_err(to_py)?);
    cfg.error_term = parse::<ErrorTerm>(error_term)?;
    cfg.noise_sd = noise_sd;
    let (x, y) = py.detach(|| simulate_parfbm(&cfg, &mut ChaCha8Rng::seed_from_u64(seed))).map_err(to_py)?;
    Ok((x.into_values(), y.into_values()))
}

/// Estimate the cycle period; `estimated_T` is `None` for no cycle.
#[pyfunction]
#[pyo3(signature = (values, span=None, t_max=None, threshold=None))]
fn detect_period<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    span: Option<usize>,
    t_max: Option<usize>,
    threshold: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let n = values.len();
    let span = span.unwrap_or_else(|| spectral::default_span(n));
    let t_max = t_max.unwrap_or_else(|| spectral::default_t_max(n));
    let threshold = threshold.unwrap_or_else(|| spectral::default_threshold(span));
    let det = spectral::detect_period(&values, span, t_max, threshold).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("estimated_T", det.estimated_t)?;
    d.set_item("line_scores", det.line_scores)?;
    d.set_item("span", det.span)?;
    d.set_item("threshold", det.threshold)?;
    Ok(d)
}

#[pyfunction]
fn kendall_tau(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    copula::kendall_tau(&pairs(&x, &y)?).map_err(to_py)
}

/// A bivariate copula from one of the five families.
#[pyclass(name = "Copula", frozen)]
struct PyCopula {
    inner: copula::Copula,
}

#[pymethods]
impl PyCopula {
    #[new]
    #[pyo3(signature = (family, theta, nu=None))]
    fn new(family: &str, theta: f64, nu: Option<f64>) -> PyResult<Self> {
        let family: CopulaFamily = parse(family)?;
        let params = match (family, nu) {
            (CopulaFamily::StudentT, nu) => CopulaParams::student(theta, nu.unwrap_or(DEFAULT_NU)),
            (_, _) => CopulaParams::theta(theta),
        };
        Ok(Self { inner: copula::Copula::new(family, params).map_err(to_py)? })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().name()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    fn cdf(&self, a: f64, b: f64) -> f64 {
        self.inner.cdf(a, b)
    }

    /// Conditional distribution of the second coordinate given the first.
    fn h(&self, v: f64, u: f64) -> f64 {
        self.inner.h(v, u)
    }

    fn h_inv(&self, w: f64, u: f64) -> f64 {
        self.inner.h_inv(w, u)
    }

    #[pyo3(signature = (m, seed=0))]
    fn sample(&self, m: usize, seed: u64) -> Vec<(f64, f64)> {
        self.inner.sample(m, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn __repr__(&self) -> String {
        format!("Copula({:?}, theta={})", self.inner.family().name(), self.inner.theta())
    }
}

/// Fit a copula by tau inversion; returns family, theta, nu, tau_hat, m.
#[pyfunction]
#[pyo3(signature = (x, y, family, nu=DEFAULT_NU))]
fn fit_copula<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>, family: &str, nu: f64) -> PyResult<Bound<'py, PyDict>> {
    let fitted = copula::fit_copula_with(&pairs(&x, &y)?, parse(family)?, FitOptions { nu }).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("family", fitted.family.name())?;
    d.set_item("theta", fitted.params.theta)?;
    d.set_item("nu", fitted.params.nu)?;
    d.set_item("tau_hat", fitted.tau_hat)?;
    d.set_item("m", fitted.m())?;
    Ok(d)
}

/// Per-phase copula regression.
#[pyclass(name = "CycloModel")]
struct PyCycloModel {
    inner: regression::CycloModel,
}

#[pymethods]
impl PyCycloModel {
    #[staticmethod]
    #[pyo3(signature = (x, y, period, family, regression="linear", nu=DEFAULT_NU))]
    fn fit(
        py: Python<'_>,
        x: Vec<f64>,
        y: Vec<f64>,
        period: usize,
        family: &str,
        regression: &str,
        nu: f64,
    ) -> PyResult<Self> {
        let family: CopulaFamily = parse(family)?;
        let options = RegressionOptions { mode: parse::<RegressionMode>(regression)?, fit: FitOptions { nu } };
        let inner = py.detach(|| regression::fit_cyclo_model_with(&x, &y, period, family, options)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: regression::CycloModel::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn period(&self) -> usize {
        self.inner.period
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    /// `(b0, b1)` for each phase.
    fn coefficients(&self) -> Vec<(f64, f64)> {
        self.inner.models.iter().map(|m| (m.b0, m.b1)).collect()
    }

    /// Prediction at `x` for 1-based time `t`.
    fn predict(&self, x: f64, t: u64) -> f64 {
        self.inner.predict(x, t)
    }

    /// Predictions at `x[t - 1]` for `t = 1..=n`.
    fn predict_series(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.predict_series(&x)
    }
}

/// Returns r, wi, ns.
#[pyfunction]
#[pyo3(signature = (y, y_hat, variant="standard"))]
fn evaluate<'py>(py: Python<'py>, y: Vec<f64>, y_hat: Vec<f64>, variant: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = metrics::evaluate(&y, &y_hat, parse::<MetricVariant>(variant)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("r", m.r)?;
    d.set_item("wi", m.wi)?;
    d.set_item("ns", m.ns)?;
    Ok(d)
}

/// Run the experiment grid and return the table as text.
/// `config` is a JSON object overriding fields of the chosen profile.
#[pyfunction]
#[pyo3(signature = (profile="desk", config=None, format="csv"))]
fn run_experiment(py: Python<'_>, profile: &str, config: Option<&str>, format: &str) -> PyResult<String> {
    let profile: Profile = parse(profile)?;
    let cfg = match config {
        Some(json) => ExperimentConfig::from_json_over(profile, json).map_err(to_py)?,
        None => ExperimentConfig::profile(profile),
    };
    let format: TableFormat = parse(format)?;
    py.detach(|| harness::run_experiment(&cfg).and_then(|r| harness::emit_table(&r, format))).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "cyclocopula")]
fn cyclocopula_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_period, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau, m)?)?;
    m.add_function(wrap_pyfunction!(fit_copula, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<PyCopula>()?;
    m.add_class::<PyCycloModel>()?;
    Ok(())
}
