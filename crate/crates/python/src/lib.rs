//! Python bindings: detectors, the three-step procedure, streaming monitors,
//! distribution helpers and the synthetic generator. Results are returned as
//! plain dicts mirroring the JSON form of the Rust types.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use srsd_core::stats;
use srsd_core::{
    DetectionParams, MonitorState, Prewhitening, RegimeSpec, SrsdOptions, Step, TimeSeries,
};

create_exception!(srsd, SrsdError, PyValueError);

fn core_err(e: srsd_core::SrsdError) -> PyErr {
    SrsdError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SrsdError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn series(values: Vec<f64>, labels: Option<Vec<f64>>) -> PyResult<TimeSeries> {
    let s = TimeSeries::new(values).map_err(core_err)?;
    match labels {
        Some(l) => s.labelled(l).map_err(core_err),
        None => Ok(s),
    }
}

fn params(p: f64, l: usize, prewhiten: &str, m: Option<usize>) -> PyResult<DetectionParams> {
    let mode: Prewhitening = prewhiten.parse().map_err(core_err)?;
    let mut out = DetectionParams::new(p, l);
    let m = m.unwrap_or(out.m);
    out = out.with_prewhitening(mode, m);
    out.validate().map_err(core_err)
}

/// Mean regimes of `values`.
#[pyfunction]
#[pyo3(signature = (values, p=0.05, l=20, labels=None))]
fn detect_mean<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    p: f64,
    l: usize,
    labels: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = series(values, labels)?;
    let r = srsd_core::detect_mean(&s, &params(p, l, "none", None)?).map_err(core_err)?;
    to_py(py, &r)
}

/// Variance regimes of zero-mean residuals.
#[pyfunction]
#[pyo3(signature = (residuals, p=0.05, l=20, labels=None))]
fn detect_variance<'py>(
    py: Python<'py>,
    residuals: Vec<f64>,
    p: f64,
    l: usize,
    labels: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = series(residuals, labels)?;
    let r = srsd_core::detect_variance(&s, &params(p, l, "none", None)?).map_err(core_err)?;
    to_py(py, &r)
}

/// Mean, variance and correlation regimes of a pair of series.
#[pyfunction]
#[pyo3(signature = (
    x, y, p=0.05, l=20, prewhiten="none", m=None, p_corr=None, l_corr=None,
    confidence=0.9, skip=Vec::new(), labels=None
))]
#[allow(clippy::too_many_arguments)]
fn run_srsd<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    p: f64,
    l: usize,
    prewhiten: &str,
    m: Option<usize>,
    p_corr: Option<f64>,
    l_corr: Option<usize>,
    confidence: f64,
    skip: Vec<String>,
    labels: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let base = params(p, l, prewhiten, m)?;
    let mut opts = SrsdOptions::new(base);
    if p_corr.is_some() || l_corr.is_some() {
        opts.correlation_params = Some(params(
            p_corr.unwrap_or(p),
            l_corr.unwrap_or(l),
            "none",
            None,
        )?);
    }
    opts.confidence = confidence;
    for step in skip {
        let step = match step.to_ascii_lowercase().as_str() {
            "mean" => Step::Mean,
            "variance" => Step::Variance,
            other => return Err(SrsdError::new_err(format!("unknown step `{other}`"))),
        };
        opts.skip.insert(step);
    }
    let xs = series(x, labels.clone())?.named("x");
    let ys = series(y, labels)?.named("y");
    let r = srsd_core::run_srsd_with(&xs, &ys, &opts).map_err(core_err)?;
    to_py(py, &r)
}

/// AR(1) coefficient from the median of bias-corrected subsample estimates.
#[pyfunction]
#[pyo3(signature = (values, m, method="ip4"))]
fn estimate_ar1<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    m: usize,
    method: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let method = match method.to_ascii_lowercase().as_str() {
        "ols" => srsd_core::Ar1Method::Ols,
        "mpk" => srsd_core::Ar1Method::Mpk,
        "ip4" => srsd_core::Ar1Method::Ip4,
        other => return Err(SrsdError::new_err(format!("unknown method `{other}`"))),
    };
    let e = srsd_core::estimate_ar1(&series(values, None)?, m, method).map_err(core_err)?;
    to_py(py, &e)
}

/// `x[i+1] - alpha * x[i]`.
#[pyfunction]
fn prewhiten(values: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    let out = srsd_core::prewhiten(&series(values, None)?, alpha).map_err(core_err)?;
    Ok(out.values().to_vec())
}

#[pyfunction]
fn t_quantile(prob: f64, df: usize) -> PyResult<f64> {
    stats::student_t_quantile(prob, df).map_err(core_err)
}

#[pyfunction]
fn f_quantile(prob: f64, df1: usize, df2: usize) -> PyResult<f64> {
    stats::f_quantile(prob, df1, df2).map_err(core_err)
}

#[pyfunction]
fn normal_quantile(prob: f64) -> PyResult<f64> {
    stats::normal_quantile(prob).map_err(core_err)
}

#[pyfunction]
fn pearson_r(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::pearson_r(&series(x, None)?, &series(y, None)?).map_err(core_err)
}

#[pyfunction]
#[pyo3(signature = (r, n, confidence=0.9))]
fn fisher_ci(r: f64, n: usize, confidence: f64) -> PyResult<(f64, f64)> {
    stats::fisher_ci(r, n, confidence).map_err(core_err)
}

/// Two-sided p-value of the difference between two correlations.
#[pyfunction]
fn fisher_compare(r1: f64, n1: usize, r2: f64, n2: usize) -> PyResult<f64> {
    Ok(stats::fisher_compare(r1, n1, r2, n2)
        .map_err(core_err)?
        .p_value)
}

/// Pair drawn from the 70-point reference design, or from a spec dict.
#[pyfunction]
#[pyo3(signature = (seed, spec=None))]
fn generate_pair(
    py: Python<'_>,
    seed: u64,
    spec: Option<Bound<'_, PyAny>>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let spec = match spec {
        None => RegimeSpec::reference(seed),
        Some(obj) => {
            let text: String = PyModule::import(py, "json")?
                .call_method1("dumps", (obj,))?
                .extract()?;
            let s: RegimeSpec =
                serde_json::from_str(&text).map_err(|e| SrsdError::new_err(e.to_string()))?;
            s.with_seed(seed)
        }
    };
    let (x, y) = srsd_core::generate_pair(&spec).map_err(core_err)?;
    Ok((x.values().to_vec(), y.values().to_vec()))
}

/// The bundled 70-point pair and its expected confirmed change points.
#[pyfunction]
fn canonical_fixture<'py>(py: Python<'py>) -> PyResult<(Vec<f64>, Vec<f64>, Bound<'py, PyAny>)> {
    let (x, y, expected) = srsd_core::canonical_fixture();
    Ok((
        x.values().to_vec(),
        y.values().to_vec(),
        to_py(py, &expected)?,
    ))
}

/// Streaming detector for one series, resumable through `to_json`.
#[pyclass(module = "srsd")]
struct Monitor {
    state: MonitorState,
}

#[pymethods]
impl Monitor {
    /// Mean monitor seeded with at least `l` values of history. `avg_var`
    /// defaults to the running-window variance of the history.
    #[staticmethod]
    #[pyo3(signature = (history, p=0.05, l=20, avg_var=None))]
    fn mean(history: Vec<f64>, p: f64, l: usize, avg_var: Option<f64>) -> PyResult<Self> {
        let params = params(p, l, "none", None)?;
        let avg_var = match avg_var {
            Some(v) => v,
            None => {
                stats::running_avg_variance(&series(history.clone(), None)?, l).map_err(core_err)?
            }
        };
        let state = srsd_core::mean_monitor(&history, avg_var, &params).map_err(core_err)?;
        Ok(Self { state })
    }

    /// Variance monitor over zero-mean residuals.
    #[staticmethod]
    #[pyo3(signature = (history, p=0.05, l=20))]
    fn variance(history: Vec<f64>, p: f64, l: usize) -> PyResult<Self> {
        let state = srsd_core::variance_monitor(&history, &params(p, l, "none", None)?)
            .map_err(core_err)?;
        Ok(Self { state })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let state = serde_json::from_str(text).map_err(|e| SrsdError::new_err(e.to_string()))?;
        Ok(Self { state })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.state).map_err(|e| SrsdError::new_err(e.to_string()))
    }

    /// Feeds one value; returns `{"status": "stable" | "candidate" | "confirmed", ...}`.
    fn push<'py>(&mut self, py: Python<'py>, value: f64) -> PyResult<Bound<'py, PyAny>> {
        let status = self.state.advance(value).map_err(core_err)?;
        to_py(py, &status)
    }

    fn change_points<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.state.change_points)
    }

    #[getter]
    fn observations(&self) -> usize {
        self.state.observations()
    }
}

#[pymodule]
fn srsd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SrsdError", m.py().get_type::<SrsdError>())?;
    m.add("__version__", srsd_core::VERSION)?;
    m.add_class::<Monitor>()?;
    m.add_function(wrap_pyfunction!(detect_mean, m)?)?;
    m.add_function(wrap_pyfunction!(detect_variance, m)?)?;
    m.add_function(wrap_pyfunction!(run_srsd, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ar1, m)?)?;
    m.add_function(wrap_pyfunction!(prewhiten, m)?)?;
    m.add_function(wrap_pyfunction!(t_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(f_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_r, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_ci, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_compare, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_fixture, m)?)?;
    Ok(())
}
