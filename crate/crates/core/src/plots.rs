//! Self-contained SVG renderings of a run log: four fixed figures
//! (tracking, velocity estimate, control effort, parameter errors), two
//! panels each. No plotting dependency; the files are plain polylines with
//! axes, ticks and a small legend, and rendering is deterministic.
//!
//! Dense series are thinned with per-bin min/max envelopes so chattering
//! signals keep their visual extent without multi-megabyte files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::OutputError;
use crate::runlog::RunLog;

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const PANEL_GAP: f64 = 58.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 56.0;
/// Above this many points a series is thinned to per-bin envelopes.
const MAX_POINTS: usize = 3000;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];

struct Series {
    name: String,
    /// Indices into the shared time axis paired with values; NaN-free.
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    y_label: String,
    series: Vec<Series>,
}

fn series(name: &str, t: &[f64], y: &[f64]) -> Series {
    let points = t
        .iter()
        .zip(y.iter())
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    Series { name: name.into(), points }
}

fn series_diff(name: &str, t: &[f64], a: &[f64], b: &[f64]) -> Series {
    let y: Vec<f64> = a.iter().zip(b.iter()).map(|(x, r)| x - r).collect();
    series(name, t, &y)
}

fn series_offset(name: &str, t: &[f64], a: &[f64], off: f64) -> Series {
    let y: Vec<f64> = a.iter().map(|x| x - off).collect();
    series(name, t, &y)
}

/// Thin to per-bin (first, min, max, last) keeping time order.
fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let bins = MAX_POINTS / 4;
    let per = points.len().div_ceil(bins);
    let mut out = Vec::with_capacity(bins * 4);
    for chunk in points.chunks(per) {
        let mut imin = 0;
        let mut imax = 0;
        for (i, p) in chunk.iter().enumerate() {
            if p.1 < chunk[imin].1 {
                imin = i;
            }
            if p.1 > chunk[imax].1 {
                imax = i;
            }
        }
        let mut keep = [0usize, imin, imax, chunk.len() - 1];
        keep.sort_unstable();
        let mut last = usize::MAX;
        for &i in &keep {
            if i != last {
                out.push(chunk[i]);
                last = i;
            }
        }
    }
    out
}

/// A tick step of the form {1, 2, 5} * 10^k giving roughly `target` ticks.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let m = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64, t_range: (f64, f64)) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = top;
    let y1 = top + PANEL_HEIGHT;

    // Value range over all series, padded; degenerate ranges get a unit pad.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in &panel.series {
        for &(_, v) in &s.points {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        let pad = hi.abs().max(1.0) * 0.1;
        lo -= pad;
        hi += pad;
    } else {
        let pad = (hi - lo) * 0.06;
        lo -= pad;
        hi += pad;
    }

    let (t_lo, t_hi) = t_range;
    let t_span = (t_hi - t_lo).max(1e-12);
    let sx = |t: f64| x0 + (t - t_lo) / t_span * (x1 - x0);
    let sy = |v: f64| y1 - (v - lo) / (hi - lo) * (y1 - y0);

    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#888" stroke-width="1"/>"##,
        w = x1 - x0,
        h = y1 - y0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{x0}" y="{y}" font-size="15" font-weight="bold" fill="#222">{t}</text>"##,
        y = y0 - 8.0,
        t = panel.title
    );
    let _ = writeln!(
        svg,
        r##"<text x="16" y="{y}" font-size="13" fill="#444" transform="rotate(-90 16 {y})" text-anchor="middle">{l}</text>"##,
        y = (y0 + y1) / 2.0,
        l = panel.y_label
    );

    // Horizontal grid + y ticks.
    let ystep = nice_step(hi - lo, 5.0);
    let mut v = (lo / ystep).ceil() * ystep;
    while v <= hi {
        let yy = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{yy:.2}" x2="{x1}" y2="{yy:.2}" stroke="#ddd" stroke-width="0.7"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{y:.2}" font-size="12" fill="#444" text-anchor="end">{t}</text>"##,
            x = x0 - 6.0,
            y = yy + 4.0,
            t = fmt_tick(v)
        );
        v += ystep;
    }
    // Vertical grid + t ticks.
    let tstep = nice_step(t_span, 8.0);
    let mut tv = (t_lo / tstep).ceil() * tstep;
    while tv <= t_hi {
        let xx = sx(tv);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.2}" y1="{y0}" x2="{xx:.2}" y2="{y1}" stroke="#eee" stroke-width="0.7"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text x="{xx:.2}" y="{y}" font-size="12" fill="#444" text-anchor="middle">{t}</text>"##,
            y = y1 + 16.0,
            t = fmt_tick(tv)
        );
        tv += tstep;
    }

    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = thin(&s.points);
        let mut d = String::with_capacity(pts.len() * 14);
        for (j, (t, vv)) in pts.iter().enumerate() {
            if j > 0 {
                d.push(' ');
            }
            let _ = write!(d, "{:.2},{:.2}", sx(*t), sy(*vv));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.1"/>"##
        );
        // Legend entry, top-right, stacked.
        let lx = x1 - 150.0;
        let ly = y0 + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{lx}" y1="{ly}" x2="{x}" y2="{ly}" stroke="{color}" stroke-width="2"/>"##,
            x = lx + 22.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{y}" font-size="12" fill="#222">{n}</text>"##,
            x = lx + 28.0,
            y = ly + 4.0,
            n = s.name
        );
    }
}

fn render_figure(title: &str, panels: &[Panel], t_range: (f64, f64), path: &Path) -> Result<(), OutputError> {
    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + PANEL_GAP + MARGIN_BOTTOM;
    let mut svg = String::with_capacity(1 << 16);
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{height}" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="{x}" y="24" font-size="17" font-weight="bold" fill="#111" text-anchor="middle">{title}</text>"##,
        x = WIDTH / 2.0
    );
    for (i, p) in panels.iter().enumerate() {
        let top = MARGIN_TOP + i as f64 * (PANEL_HEIGHT + PANEL_GAP);
        render_panel(&mut svg, p, top, t_range);
    }
    let _ = writeln!(
        svg,
        r##"<text x="{x}" y="{y}" font-size="13" fill="#444" text-anchor="middle">t [s]</text>"##,
        x = (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        y = height - 14.0
    );
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| OutputError::io(path, e))
}

/// Render the four standard figures for a run into `outdir`, returning the
/// created paths in order. Fails without creating anything if the log is
/// empty.
pub fn emit_plots(log: &RunLog, outdir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    if log.is_empty() {
        return Err(OutputError::EmptyLog);
    }
    fs::create_dir_all(outdir).map_err(|e| OutputError::io(outdir, e))?;
    let t = &log.t;
    let t_range = (t[0], *t.last().unwrap());
    let label = log.label.as_str();
    let mut paths = Vec::with_capacity(4);

    {
        let mut top = vec![
            series("r", t, &log.r),
            series("x1", t, &log.x1),
        ];
        let mut bottom = vec![series_diff("x1 - r", t, &log.x1, &log.r)];
        if let Some(x1_hat) = &log.x1_hat {
            top.push(series("x1 est", t, x1_hat));
            bottom.push(series_diff("x1 est - r", t, x1_hat, &log.r));
        }
        let panels = [
            Panel { title: format!("position tracking ({label})"), y_label: "position".into(), series: top },
            Panel { title: "tracking error".into(), y_label: "error".into(), series: bottom },
        ];
        let path = outdir.join("f1_tracking.svg");
        render_figure("f1: tracking", &panels, t_range, &path)?;
        paths.push(path);
    }
    {
        let panels = [
            Panel {
                title: format!("velocity and estimate ({label})"),
                y_label: "velocity".into(),
                series: vec![series("x2", t, &log.x2), series("x2 est", t, &log.x2_hat)],
            },
            Panel {
                title: "velocity estimate error".into(),
                y_label: "error".into(),
                series: vec![series_diff("x2 est - x2", t, &log.x2_hat, &log.x2)],
            },
        ];
        let path = outdir.join("f2_observer.svg");
        render_figure("f2: velocity estimate", &panels, t_range, &path)?;
        paths.push(path);
    }
    {
        let panels = [
            Panel {
                title: format!("control input ({label})"),
                y_label: "u".into(),
                series: vec![series("u", t, &log.u), series("u ideal", t, &log.u_star)],
            },
            Panel {
                title: "distance to the full-information input".into(),
                y_label: "u - u ideal".into(),
                series: vec![series_diff("u - u ideal", t, &log.u, &log.u_star)],
            },
        ];
        let path = outdir.join("f3_control.svg");
        render_figure("f3: control effort", &panels, t_range, &path)?;
        paths.push(path);
    }
    {
        let panels = [
            Panel {
                title: format!("viscous-level estimate error ({label})"),
                y_label: "error".into(),
                series: vec![series_offset("th1 est - th1", t, &log.theta1_hat, log.plant.theta1)],
            },
            Panel {
                title: "friction-level estimate error".into(),
                y_label: "error".into(),
                series: vec![series_offset("th2 est - th2", t, &log.theta2_hat, log.plant.theta2)],
            },
        ];
        let path = outdir.join("f4_params.svg");
        render_figure("f4: parameter estimates", &panels, t_range, &path)?;
        paths.push(path);
    }
    Ok(paths)
}
