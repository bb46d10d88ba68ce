//! Python bindings for the observer-benchmark toolkit.
//!
//! The module exposes the closed-loop simulation, the gain sweep, and the
//! small analytic helpers as plain functions returning dicts/lists/tuples,
//! so results drop straight into numpy/pandas without any wrapper classes.
//!
//! Scenarios are described by the same TOML text the CLI accepts; every key
//! is optional, so `"[integrator]\nt_end = 2.0"` is a complete config.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use frictrack::config::{default_config_toml, parse_config_str};
use frictrack::plant::PlantParams;
use frictrack::reference::PiecewiseReference;
use frictrack::runlog::RunLog;
use frictrack::scenario::{
    IandISetup, Metrics, ObserverChoice, ScenarioConfig, SmSetup, DEFAULT_NOISE_AMPLITUDE,
};
use frictrack::sim::SignMode;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_from(
    config_toml: Option<&str>,
    observer: Option<&str>,
    seed: Option<u64>,
    noise_amplitude: Option<f64>,
) -> PyResult<ScenarioConfig> {
    let mut cfg = match config_toml {
        Some(text) => parse_config_str(text).map_err(value_err)?,
        None => ScenarioConfig::default(),
    };
    if let Some(kind) = observer {
        cfg.observer = match kind {
            "iandi" => ObserverChoice::IandI(IandISetup::default()),
            "slidingmode" => ObserverChoice::SlidingMode(SmSetup::default()),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown observer {other:?}; expected \"iandi\" or \"slidingmode\""
                )))
            }
        };
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(a) = noise_amplitude {
        cfg.noise.amplitude = a;
    }
    Ok(cfg)
}

fn plant_from(
    theta1: Option<f64>,
    theta2: Option<f64>,
    vartheta: Option<f64>,
) -> PyResult<PlantParams> {
    let d = PlantParams::default();
    let p = PlantParams {
        theta1: theta1.unwrap_or(d.theta1),
        theta2: theta2.unwrap_or(d.theta2),
        vartheta: vartheta.unwrap_or(d.vartheta),
    };
    p.validate().map_err(value_err)?;
    Ok(p)
}

fn metrics_dict<'py>(py: Python<'py>, m: &Metrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("rms_tracking_error", m.rms_tracking_error)?;
    d.set_item("max_tracking_error", m.max_tracking_error)?;
    d.set_item("max_observer_error", m.max_observer_error)?;
    d.set_item("control_total_variation", m.control_total_variation)?;
    d.set_item(
        "theta_error_final",
        (m.theta_error_final[0], m.theta_error_final[1]),
    )?;
    d.set_item("settle_time", m.settle_time)?;
    match &m.diverged {
        None => d.set_item("diverged", py.None())?,
        Some(dv) => {
            let dd = PyDict::new(py);
            dd.set_item("t", dv.t)?;
            dd.set_item("reason", dv.reason.as_str())?;
            d.set_item("diverged", dd)?;
        }
    }
    d.set_item("window_start", m.window_start)?;
    Ok(d)
}

fn log_dict<'py>(py: Python<'py>, log: &RunLog) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", log.t.clone())?;
    d.set_item("r", log.r.clone())?;
    d.set_item("x1", log.x1.clone())?;
    d.set_item("x2", log.x2.clone())?;
    d.set_item("y", log.y.clone())?;
    d.set_item("x1_hat", log.x1_hat.clone())?;
    d.set_item("x2_hat", log.x2_hat.clone())?;
    d.set_item("theta1_hat", log.theta1_hat.clone())?;
    d.set_item("theta2_hat", log.theta2_hat.clone())?;
    d.set_item("u", log.u.clone())?;
    d.set_item("u_star", log.u_star.clone())?;
    d.set_item("eps_formula", log.eps_formula.clone())?;
    d.set_item("eps_residual", log.eps_residual.clone())?;
    Ok(d)
}

/// Default scenario as TOML text: smooth adaptive observer, noise-free,
/// 150 s at 10 kHz. Edit any subset of keys and pass the result back to
/// `run_scenario` / `k1_sweep`.
#[pyfunction]
fn default_config() -> &'static str {
    default_config_toml()
}

/// Simulate one closed-loop run and return its summary (and, by default,
/// the decimated time series).
///
/// `config_toml` is the same TOML the CLI accepts; omitted keys take the
/// benchmark defaults. `observer` ("iandi" or "slidingmode") swaps in that
/// observer with its default setup; `seed` and `noise_amplitude` override
/// the corresponding config values. The result dict holds `label`,
/// `observer`, `seed`, `metrics`, and — with `include_log` — `log`, a dict
/// of equal-length column lists (`x1_hat` is None for the smooth observer,
/// which does not estimate the position). A run that blows up mid-horizon
/// still returns normally, with `metrics["diverged"]` set; only bad
/// configuration raises.
#[pyfunction]
#[pyo3(signature = (config_toml=None, *, observer=None, seed=None, noise_amplitude=None, include_log=true))]
fn run_scenario(
    py: Python<'_>,
    config_toml: Option<&str>,
    observer: Option<&str>,
    seed: Option<u64>,
    noise_amplitude: Option<f64>,
    include_log: bool,
) -> PyResult<Py<PyDict>> {
    let cfg = config_from(config_toml, observer, seed, noise_amplitude)?;
    let res = py
        .detach(|| frictrack::scenario::run_scenario(&cfg))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("label", res.log.label.as_str())?;
    d.set_item("observer", cfg.observer.kind_name())?;
    d.set_item("seed", cfg.seed)?;
    d.set_item("metrics", metrics_dict(py, &res.metrics)?)?;
    if include_log {
        d.set_item("log", log_dict(py, &res.log)?)?;
    }
    Ok(d.unbind())
}

/// Re-run the smooth-observer scenario across a list of gains, in parallel,
/// and return one dict per gain: `k1`, `noisy`, `stable`, `metrics`.
///
/// With `noisy=True` each run uses the config's noise amplitude, or the
/// module's `DEFAULT_NOISE_AMPLITUDE` if the config is noise-free. A run
/// counts as stable when it neither diverges nor exceeds the configured
/// post-transient velocity-error threshold.
#[pyfunction]
#[pyo3(signature = (k1_values, noisy=false, config_toml=None))]
fn k1_sweep(
    py: Python<'_>,
    k1_values: Vec<f64>,
    noisy: bool,
    config_toml: Option<&str>,
) -> PyResult<Py<PyList>> {
    let base = match config_toml {
        Some(text) => parse_config_str(text).map_err(value_err)?,
        None => ScenarioConfig::default(),
    };
    let rows = py
        .detach(|| frictrack::scenario::k1_sweep(&k1_values, noisy, &base))
        .map_err(value_err)?;
    let out = PyList::empty(py);
    for row in &rows {
        let d = PyDict::new(py);
        d.set_item("k1", row.k1)?;
        d.set_item("noisy", row.noisy)?;
        d.set_item("stable", row.stable)?;
        d.set_item("metrics", metrics_dict(py, &row.metrics)?)?;
        out.append(d)?;
    }
    Ok(out.unbind())
}

/// Worst-case quadratic-form decay ratio for the velocity/parameter error
/// dynamics at observer gain `k1` (plant parameters default to the
/// benchmark values). Grows like `k1**4` for large gains — the analytic
/// reason raising the gain eventually stops paying.
#[pyfunction]
#[pyo3(signature = (k1, *, theta1=None, theta2=None, vartheta=None))]
fn lyapunov_rate(
    k1: f64,
    theta1: Option<f64>,
    theta2: Option<f64>,
    vartheta: Option<f64>,
) -> PyResult<f64> {
    let p = plant_from(theta1, theta2, vartheta)?;
    Ok(frictrack::scenario::lyapunov_rate(k1, &p))
}

/// Sum of |x[i+1] - x[i]| over a series of at least two samples.
#[pyfunction]
fn total_variation(series: Vec<f64>) -> PyResult<f64> {
    frictrack::scenario::total_variation(&series).map_err(value_err)
}

/// Reference position and its first two derivatives at time `t`, as a
/// `(r, rdot, rddot)` tuple. Evaluates the benchmark hold/ramp profile, or
/// the `[[reference]]` table of `config_toml` if given.
#[pyfunction]
#[pyo3(signature = (t, config_toml=None))]
fn reference_eval(t: f64, config_toml: Option<&str>) -> PyResult<(f64, f64, f64)> {
    let reference = match config_toml {
        Some(text) => parse_config_str(text).map_err(value_err)?.reference,
        None => PiecewiseReference::default(),
    };
    let s = reference.eval(t);
    Ok((s.r, s.rdot, s.rddot))
}

/// Friction force `theta1 * x2 + theta2 * tanh(vartheta * x2)` at velocity
/// `x2` (parameters default to the benchmark plant).
#[pyfunction]
#[pyo3(signature = (x2, *, theta1=None, theta2=None, vartheta=None))]
fn friction_force(
    x2: f64,
    theta1: Option<f64>,
    theta2: Option<f64>,
    vartheta: Option<f64>,
) -> PyResult<f64> {
    let p = plant_from(theta1, theta2, vartheta)?;
    Ok(frictrack::plant::friction_force(x2, &p))
}

/// Overflow-safe `log(cosh(z))`, the antiderivative of `tanh`.
#[pyfunction]
fn logcosh(z: f64) -> f64 {
    frictrack::observers::logcosh(z)
}

/// Relay evaluation used by the sliding-mode injection terms: the exact
/// sign of `z` (with `sgn(0) = 0`), or, with `eps`, the saturated linear
/// approximation `clamp(z / eps, -1, 1)`.
#[pyfunction]
#[pyo3(signature = (z, eps=None))]
fn sgn(z: f64, eps: Option<f64>) -> PyResult<f64> {
    let mode = match eps {
        None => SignMode::Exact,
        Some(e) if e.is_finite() && e > 0.0 => SignMode::BoundaryLayer { eps: e },
        Some(e) => {
            return Err(PyValueError::new_err(format!(
                "eps must be finite and > 0, got {e}"
            )))
        }
    };
    Ok(frictrack::sim::sgn(z, mode))
}

#[pymodule]
pub fn frictrack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_NOISE_AMPLITUDE", DEFAULT_NOISE_AMPLITUDE)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(k1_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_rate, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(reference_eval, m)?)?;
    m.add_function(wrap_pyfunction!(friction_force, m)?)?;
    m.add_function(wrap_pyfunction!(logcosh, m)?)?;
    m.add_function(wrap_pyfunction!(sgn, m)?)?;
    Ok(())
}
