//! Plain-text summaries: per-run metrics and the two-run comparison table.

use crate::scenario::Metrics;

fn num(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else {
        format!("{v:.6e}")
    }
}

/// Render one run's metrics as `key: value` lines.
pub fn format_metrics(label: &str, m: &Metrics) -> String {
    let mut out = String::new();
    out.push_str(&format!("run: {label}\n"));
    out.push_str(&format!("evaluation window starts at: {} s\n", m.window_start));
    out.push_str(&format!("rms tracking error: {}\n", num(m.rms_tracking_error)));
    out.push_str(&format!("max tracking error: {}\n", num(m.max_tracking_error)));
    out.push_str(&format!("max observer error: {}\n", num(m.max_observer_error)));
    out.push_str(&format!(
        "control total variation: {}\n",
        num(m.control_total_variation)
    ));
    out.push_str(&format!(
        "final parameter error: ({}, {})\n",
        num(m.theta_error_final[0]),
        num(m.theta_error_final[1])
    ));
    match m.settle_time {
        Some(t) => out.push_str(&format!("settle time: {t:.4} s\n")),
        None => out.push_str("settle time: never\n"),
    }
    match &m.diverged {
        Some(d) => out.push_str(&format!("diverged: at t = {:.4} s ({})\n", d.t, d.reason)),
        None => out.push_str("diverged: no\n"),
    }
    out
}

/// A labeled metrics set for comparison.
#[derive(Clone, Copy, Debug)]
pub struct Compared<'a> {
    pub label: &'a str,
    pub metrics: &'a Metrics,
}

fn ratio_cell(a: f64, b: f64, any_diverged: bool) -> String {
    if any_diverged || a.is_nan() || b.is_nan() || a == 0.0 {
        "-".into()
    } else {
        format!("{:.3}", b / a)
    }
}

/// Side-by-side comparison of two runs with b/a ratios. Ratios are
/// suppressed when either run diverged or a denominator is unusable; a
/// diverged run is flagged in its column.
pub fn compare_report(a: Compared<'_>, b: Compared<'_>) -> String {
    let any_diverged = a.metrics.diverged.is_some() || b.metrics.diverged.is_some();
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28}{:>18}{:>18}{:>12}\n",
        "metric", a.label, b.label, "b/a"
    ));
    out.push_str(&"-".repeat(76));
    out.push('\n');
    let rows: [(&str, f64, f64); 5] = [
        ("rms tracking error", a.metrics.rms_tracking_error, b.metrics.rms_tracking_error),
        ("max tracking error", a.metrics.max_tracking_error, b.metrics.max_tracking_error),
        ("max observer error", a.metrics.max_observer_error, b.metrics.max_observer_error),
        (
            "control total variation",
            a.metrics.control_total_variation,
            b.metrics.control_total_variation,
        ),
        (
            "|final theta1 error|",
            a.metrics.theta_error_final[0].abs(),
            b.metrics.theta_error_final[0].abs(),
        ),
    ];
    for (name, va, vb) in rows {
        out.push_str(&format!(
            "{:<28}{:>18}{:>18}{:>12}\n",
            name,
            num(va),
            num(vb),
            ratio_cell(va, vb, any_diverged)
        ));
    }
    let settle = |m: &Metrics| match m.settle_time {
        Some(t) => format!("{t:.4} s"),
        None => "never".into(),
    };
    out.push_str(&format!(
        "{:<28}{:>18}{:>18}{:>12}\n",
        "settle time",
        settle(a.metrics),
        settle(b.metrics),
        "-"
    ));
    let div = |m: &Metrics| match &m.diverged {
        Some(d) => format!("at t = {:.2}", d.t),
        None => "no".into(),
    };
    out.push_str(&format!(
        "{:<28}{:>18}{:>18}{:>12}\n",
        "diverged",
        div(a.metrics),
        div(b.metrics),
        "-"
    ));
    out.push('\n');
    if !any_diverged
        && !a.metrics.control_total_variation.is_nan()
        && !b.metrics.control_total_variation.is_nan()
        && a.metrics.control_total_variation > 0.0
    {
        out.push_str(&format!(
            "chattering ratio (control total variation, {}/{}): {:.3}\n",
            b.label,
            a.label,
            b.metrics.control_total_variation / a.metrics.control_total_variation
        ));
    }
    if let Some(d) = &b.metrics.diverged {
        out.push_str(&format!("{} diverged at t = {:.4}: {}\n", b.label, d.t, d.reason));
    }
    if let Some(d) = &a.metrics.diverged {
        out.push_str(&format!("{} diverged at t = {:.4}: {}\n", a.label, d.t, d.reason));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Divergence;

    fn metrics() -> Metrics {
        Metrics {
            rms_tracking_error: 2e-3,
            max_tracking_error: 8e-3,
            max_observer_error: 5e-4,
            control_total_variation: 12.5,
            theta_error_final: [-0.3, 0.1],
            settle_time: Some(11.25),
            diverged: None,
            window_start: 75.0,
        }
    }

    #[test]
    fn identical_runs_give_unit_ratios() {
        let m = metrics();
        let rep = compare_report(
            Compared { label: "a", metrics: &m },
            Compared { label: "b", metrics: &m },
        );
        assert!(rep.contains("1.000"));
        assert!(rep.contains("chattering ratio (control total variation, b/a): 1.000"));
    }

    #[test]
    fn divergence_is_flagged_and_ratios_suppressed() {
        let a = metrics();
        let mut b = metrics();
        b.diverged = Some(Divergence { t: 87.25, reason: "boom".into() });
        b.rms_tracking_error = f64::NAN;
        let rep = compare_report(
            Compared { label: "good", metrics: &a },
            Compared { label: "bad", metrics: &b },
        );
        assert!(rep.contains("at t = 87.25"));
        assert!(rep.contains("bad diverged at t = 87.2500: boom"));
        assert!(!rep.contains("chattering ratio"));
        assert!(rep.contains("n/a"));
        // No numeric ratio cells survive.
        for line in rep.lines().skip(2) {
            assert!(!line.ends_with("1.000"));
        }
    }

    #[test]
    fn metrics_text_is_stable() {
        let m = metrics();
        let txt = format_metrics("demo", &m);
        assert!(txt.contains("run: demo\n"));
        assert!(txt.contains("rms tracking error: 2.000000e-3"));
        assert!(txt.contains("settle time: 11.2500 s"));
        assert!(txt.contains("diverged: no"));
        let mut d = m.clone();
        d.diverged = Some(Divergence { t: 3.5, reason: "x".into() });
        d.settle_time = None;
        let txt = format_metrics("demo", &d);
        assert!(txt.contains("settle time: never"));
        assert!(txt.contains("diverged: at t = 3.5000 s (x)"));
    }
}
