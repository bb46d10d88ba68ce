//! Exercise the Python module through a real embedded interpreter: import
//! it, call every exported function from Python, and check values against
//! the core crate.

use std::sync::Once;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use frictrack_py::frictrack_py;

/// Register the module and start one interpreter for the whole test binary.
fn ensure_python() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(frictrack_py);
        Python::initialize();
    });
}

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> PyResult<R>) -> R {
    ensure_python();
    Python::attach(|py| {
        let m = py.import("frictrack_py").expect("module import");
        f(py, &m).expect("python call")
    })
}

fn call_f64(m: &Bound<'_, PyModule>, code: &str) -> f64 {
    let py = m.py();
    let globals = PyDict::new(py);
    globals.set_item("ft", m).unwrap();
    py.eval(&std::ffi::CString::new(code).unwrap(), Some(&globals), None)
        .unwrap_or_else(|e| panic!("eval {code:?}: {e}"))
        .extract()
        .unwrap_or_else(|e| panic!("extract {code:?}: {e}"))
}

#[test]
fn scalar_helpers_match_core_values() {
    with_module(|_py, m| {
        assert_eq!(call_f64(m, "ft.lyapunov_rate(1.0)"), 1.014e6);
        assert_eq!(call_f64(m, "ft.logcosh(0.0)"), 0.0);
        assert_eq!(call_f64(m, "ft.friction_force(0.0)"), 0.0);
        assert_eq!(
            call_f64(m, "ft.friction_force(2.0)"),
            frictrack::plant::friction_force(2.0, &Default::default())
        );
        assert_eq!(call_f64(m, "ft.sgn(-3.0)"), -1.0);
        assert_eq!(call_f64(m, "ft.sgn(0.0)"), 0.0);
        assert_eq!(call_f64(m, "ft.sgn(0.5, eps=2.0)"), 0.25);
        assert_eq!(call_f64(m, "ft.total_variation([0.0, 1.0, 0.5])"), 1.5);
        assert_eq!(call_f64(m, "ft.reference_eval(100.0)[0]"), 1.0);
        assert_eq!(call_f64(m, "ft.reference_eval(100.0)[1]"), -0.05);
        assert_eq!(call_f64(m, "ft.reference_eval(100.0)[2]"), 0.0);
        Ok(())
    });
}

#[test]
fn default_config_round_trips_through_run() {
    with_module(|py, m| {
        let toml: String = m.getattr("default_config")?.call0()?.extract()?;
        assert!(toml.contains("observer = \"iandi\""));

        // Shorten the horizon through the config text and run both observers.
        let short = "[integrator]\nt_end = 2.0\n";
        for (observer, expect_x1_hat) in [("iandi", false), ("slidingmode", true)] {
            let kwargs = PyDict::new(py);
            kwargs.set_item("observer", observer)?;
            let result = m
                .getattr("run_scenario")?
                .call((short,), Some(&kwargs))?
                .cast_into::<PyDict>()
                .unwrap();
            let label: String = result.get_item("label")?.unwrap().extract()?;
            assert!(label.starts_with(observer), "label {label:?}");

            let log = result
                .get_item("log")?
                .unwrap()
                .cast_into::<PyDict>()
                .unwrap();
            let t: Vec<f64> = log.get_item("t")?.unwrap().extract()?;
            assert_eq!(t.len(), 2001); // 2 s at 10 kHz, decimation 10
            assert_eq!(t[0], 0.0);
            let x1_hat = log.get_item("x1_hat")?.unwrap();
            assert_eq!(x1_hat.is_none(), !expect_x1_hat);

            let metrics = result
                .get_item("metrics")?
                .unwrap()
                .cast_into::<PyDict>()
                .unwrap();
            let rms: f64 = metrics.get_item("rms_tracking_error")?.unwrap().extract()?;
            assert!(rms.is_finite() && rms >= 0.0);
            assert!(metrics.get_item("diverged")?.unwrap().is_none());
        }
        Ok(())
    });
}

#[test]
fn repeated_noisy_runs_are_identical() {
    with_module(|py, m| {
        let run = |seed: u64| -> PyResult<(f64, Vec<f64>)> {
            let kwargs = PyDict::new(py);
            kwargs.set_item("seed", seed)?;
            kwargs.set_item("noise_amplitude", 3e-4)?;
            let result = m
                .getattr("run_scenario")?
                .call(("[integrator]\nt_end = 1.0\n",), Some(&kwargs))?
                .cast_into::<PyDict>()
                .unwrap();
            let metrics = result.get_item("metrics")?.unwrap();
            let rms: f64 = metrics.get_item("rms_tracking_error")?.extract()?;
            let log = result.get_item("log")?.unwrap();
            let y: Vec<f64> = log.get_item("y")?.extract()?;
            Ok((rms, y))
        };
        let (rms_a, y_a) = run(7)?;
        let (rms_b, y_b) = run(7)?;
        let (rms_c, y_c) = run(8)?;
        assert_eq!(rms_a, rms_b);
        assert_eq!(y_a, y_b);
        assert!(y_a != y_c || rms_a != rms_c, "different seed changed nothing");
        Ok(())
    });
}

#[test]
fn sweep_rows_come_back_per_gain() {
    with_module(|py, m| {
        let kwargs = PyDict::new(py);
        kwargs.set_item("noisy", false)?;
        // Long enough that the observer transient has cleared the degraded
        // threshold by the start of the evaluation window (t_end / 2).
        kwargs.set_item("config_toml", "[integrator]\nt_end = 10.0\n")?;
        let rows = m
            .getattr("k1_sweep")?
            .call((vec![1.0, 44.0],), Some(&kwargs))?
            .cast_into::<PyList>()
            .unwrap();
        assert_eq!(rows.len(), 2);
        let first = rows.get_item(0)?.cast_into::<PyDict>().unwrap();
        assert_eq!(first.get_item("k1")?.unwrap().extract::<f64>()?, 1.0);
        assert!(!first.get_item("noisy")?.unwrap().extract::<bool>()?);
        let stable: bool = first.get_item("stable")?.unwrap().extract()?;
        assert!(stable);
        Ok(())
    });
}

#[test]
fn bad_inputs_raise_value_error() {
    ensure_python();
    Python::attach(|py| {
        let m = py.import("frictrack_py").expect("module import");
        let expect_value_error = |err: PyErr| {
            assert!(
                err.is_instance_of::<pyo3::exceptions::PyValueError>(py),
                "expected ValueError, got {err}"
            );
        };
        expect_value_error(
            m.getattr("run_scenario")
                .unwrap()
                .call1(("no_such_key = 1",))
                .unwrap_err(),
        );
        expect_value_error(
            m.getattr("total_variation")
                .unwrap()
                .call1((vec![1.0],))
                .unwrap_err(),
        );
        let kwargs = PyDict::new(py);
        kwargs.set_item("eps", -1.0).unwrap();
        expect_value_error(
            m.getattr("sgn")
                .unwrap()
                .call((1.0,), Some(&kwargs))
                .unwrap_err(),
        );
        let kwargs = PyDict::new(py);
        kwargs.set_item("observer", "kalman").unwrap();
        expect_value_error(
            m.getattr("run_scenario")
                .unwrap()
                .call((), Some(&kwargs))
                .unwrap_err(),
        );
    });
}
