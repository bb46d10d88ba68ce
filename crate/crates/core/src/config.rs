//! TOML configuration for scenarios.
//!
//! Every key is optional — an empty file (or no file) runs the benchmark
//! scenario. Unknown keys are rejected, and keys belonging to the observer
//! that is *not* selected are rejected by name, so a config can never
//! silently carry dead settings.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::ConfigError;
use crate::reference::{PiecewiseReference, Segment, SegmentKind};
use crate::scenario::{IandISetup, ObserverChoice, ScenarioConfig, SmSetup};
use crate::sim::{Method, SignMode};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    observer: Option<String>,
    seed: Option<u64>,
    noise_amplitude: Option<f64>,
    noise_additive: Option<bool>,
    measurement_rate: Option<f64>,
    plant: Option<RawPlant>,
    controller: Option<RawController>,
    integrator: Option<RawIntegrator>,
    observer_gains: Option<RawObserverGains>,
    initial: Option<RawInitial>,
    reference: Option<Vec<RawSegment>>,
    metrics: Option<RawMetrics>,
    logging: Option<RawLogging>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    theta1: Option<f64>,
    theta2: Option<f64>,
    vartheta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    alpha1: Option<f64>,
    alpha2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<String>,
    step: Option<f64>,
    t_end: Option<f64>,
    sign_mode: Option<String>,
    boundary_layer_eps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserverGains {
    k1: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    gamma0: Option<Vec<f64>>,
    theta_bar: Option<Vec<f64>>,
    regressor_uses_plant_velocity: Option<bool>,
    innovation_uses_plant_position: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    x1: Option<f64>,
    x2: Option<f64>,
    x2_i: Option<f64>,
    theta1_i: Option<f64>,
    theta2_i: Option<f64>,
    x1_hat: Option<f64>,
    x2_hat: Option<f64>,
    delta_theta: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    t_start: f64,
    kind: String,
    value: Option<f64>,
    value_from: Option<f64>,
    value_to: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    post_transient_start: Option<f64>,
    degraded_threshold: Option<f64>,
    settle_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLogging {
    decimation: Option<u32>,
}

fn pair(field: &str, v: Vec<f64>) -> Result<[f64; 2], ConfigError> {
    <[f64; 2]>::try_from(v)
        .map_err(|_| ConfigError::field(field, "expected exactly two values"))
}

/// Reject a key that belongs to the other observer.
fn inapplicable<T>(value: &Option<T>, field: &str, wanted_by: &str) -> Result<(), ConfigError> {
    if value.is_some() {
        return Err(ConfigError::field(
            field,
            format!("only applies to the {wanted_by} observer"),
        ));
    }
    Ok(())
}

fn build(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();

    let sliding = match raw.observer.as_deref() {
        None | Some("iandi") => false,
        Some("slidingmode") => true,
        Some(other) => {
            return Err(ConfigError::field(
                "observer",
                format!("unknown observer `{other}` (expected \"iandi\" or \"slidingmode\")"),
            ))
        }
    };

    if let Some(v) = raw.seed {
        cfg.seed = v;
    }
    if let Some(v) = raw.noise_amplitude {
        cfg.noise.amplitude = v;
    }
    if let Some(v) = raw.noise_additive {
        cfg.noise.additive = v;
    }
    if let Some(v) = raw.measurement_rate {
        cfg.noise.measurement_rate = v;
    }

    let p = raw.plant.unwrap_or_default();
    if let Some(v) = p.theta1 {
        cfg.plant.theta1 = v;
    }
    if let Some(v) = p.theta2 {
        cfg.plant.theta2 = v;
    }
    if let Some(v) = p.vartheta {
        cfg.plant.vartheta = v;
    }

    let c = raw.controller.unwrap_or_default();
    if let Some(v) = c.alpha1 {
        cfg.gains.alpha1 = v;
    }
    if let Some(v) = c.alpha2 {
        cfg.gains.alpha2 = v;
    }

    let integ = raw.integrator.unwrap_or_default();
    if let Some(m) = integ.method.as_deref() {
        cfg.integrator.method = match m {
            "euler" => Method::Euler,
            "rk4" => Method::Rk4,
            other => {
                return Err(ConfigError::field(
                    "integrator.method",
                    format!("unknown method `{other}` (expected \"euler\" or \"rk4\")"),
                ))
            }
        };
    }
    if let Some(v) = integ.step {
        cfg.integrator.step_h = v;
    }
    if let Some(v) = integ.t_end {
        cfg.integrator.t_end = v;
    }
    cfg.integrator.sign_mode = match (integ.sign_mode.as_deref(), integ.boundary_layer_eps) {
        (None | Some("exact"), None) => SignMode::Exact,
        (None | Some("exact"), Some(_)) => {
            return Err(ConfigError::field(
                "integrator.boundary_layer_eps",
                "only valid with sign_mode = \"boundary_layer\"",
            ))
        }
        (Some("boundary_layer"), Some(eps)) => SignMode::BoundaryLayer { eps },
        (Some("boundary_layer"), None) => {
            return Err(ConfigError::field(
                "integrator.boundary_layer_eps",
                "required when sign_mode = \"boundary_layer\"",
            ))
        }
        (Some(other), _) => {
            return Err(ConfigError::field(
                "integrator.sign_mode",
                format!("unknown mode `{other}` (expected \"exact\" or \"boundary_layer\")"),
            ))
        }
    };

    let g = raw.observer_gains.unwrap_or_default();
    let init = raw.initial.unwrap_or_default();
    if let Some(v) = init.x1 {
        cfg.x1_0 = v;
    }
    if let Some(v) = init.x2 {
        cfg.x2_0 = v;
    }
    if sliding {
        inapplicable(&g.k1, "observer_gains.k1", "iandi")?;
        inapplicable(&init.x2_i, "initial.x2_i", "iandi")?;
        inapplicable(&init.theta1_i, "initial.theta1_i", "iandi")?;
        inapplicable(&init.theta2_i, "initial.theta2_i", "iandi")?;
        let mut setup = SmSetup::default();
        if let Some(v) = g.c1 {
            setup.c1 = v;
        }
        if let Some(v) = g.c2 {
            setup.c2 = v;
        }
        if let Some(v) = g.gamma0 {
            setup.gamma0 = pair("observer_gains.gamma0", v)?;
        }
        if let Some(v) = g.theta_bar {
            setup.theta_bar = pair("observer_gains.theta_bar", v)?;
        }
        if let Some(v) = g.regressor_uses_plant_velocity {
            setup.regressor_uses_plant_velocity = v;
        }
        if let Some(v) = g.innovation_uses_plant_position {
            setup.innovation_uses_plant_position = v;
        }
        if let Some(v) = init.x1_hat {
            setup.x1_hat0 = v;
        }
        if let Some(v) = init.x2_hat {
            setup.x2_hat0 = v;
        }
        if let Some(v) = init.delta_theta {
            setup.delta_theta0 = Some(pair("initial.delta_theta", v)?);
        }
        cfg.observer = ObserverChoice::SlidingMode(setup);
    } else {
        inapplicable(&g.c1, "observer_gains.c1", "slidingmode")?;
        inapplicable(&g.c2, "observer_gains.c2", "slidingmode")?;
        inapplicable(&g.gamma0, "observer_gains.gamma0", "slidingmode")?;
        inapplicable(&g.theta_bar, "observer_gains.theta_bar", "slidingmode")?;
        inapplicable(
            &g.regressor_uses_plant_velocity,
            "observer_gains.regressor_uses_plant_velocity",
            "slidingmode",
        )?;
        inapplicable(
            &g.innovation_uses_plant_position,
            "observer_gains.innovation_uses_plant_position",
            "slidingmode",
        )?;
        inapplicable(&init.x1_hat, "initial.x1_hat", "slidingmode")?;
        inapplicable(&init.x2_hat, "initial.x2_hat", "slidingmode")?;
        inapplicable(&init.delta_theta, "initial.delta_theta", "slidingmode")?;
        let mut setup = IandISetup::default();
        if let Some(v) = g.k1 {
            setup.k1 = v;
        }
        if let Some(v) = init.x2_i {
            setup.x2_i0 = v;
        }
        if let Some(v) = init.theta1_i {
            setup.theta1_i0 = v;
        }
        if let Some(v) = init.theta2_i {
            setup.theta2_i0 = v;
        }
        cfg.observer = ObserverChoice::IandI(setup);
    }

    if let Some(segments) = raw.reference {
        let mut segs = Vec::with_capacity(segments.len());
        for (i, s) in segments.into_iter().enumerate() {
            let where_ = |k: &str| format!("reference[{i}].{k}");
            let kind = match s.kind.as_str() {
                "hold" => {
                    if s.value_from.is_some() || s.value_to.is_some() {
                        return Err(ConfigError::field(
                            where_("value_from"),
                            "a hold segment takes `value` only",
                        ));
                    }
                    let value = s
                        .value
                        .ok_or_else(|| ConfigError::field(where_("value"), "required for a hold segment"))?;
                    SegmentKind::Hold { value }
                }
                "ramp" => {
                    if s.value.is_some() {
                        return Err(ConfigError::field(
                            where_("value"),
                            "a ramp segment takes `value_from` and `value_to`",
                        ));
                    }
                    let from = s.value_from.ok_or_else(|| {
                        ConfigError::field(where_("value_from"), "required for a ramp segment")
                    })?;
                    let to = s.value_to.ok_or_else(|| {
                        ConfigError::field(where_("value_to"), "required for a ramp segment")
                    })?;
                    SegmentKind::Ramp { from, to }
                }
                other => {
                    return Err(ConfigError::field(
                        where_("kind"),
                        format!("unknown segment kind `{other}` (expected \"hold\" or \"ramp\")"),
                    ))
                }
            };
            segs.push(Segment { t_start: s.t_start, kind });
        }
        cfg.reference = PiecewiseReference::new(segs)?;
    }

    let m = raw.metrics.unwrap_or_default();
    if m.post_transient_start.is_some() {
        cfg.metrics.post_transient_start = m.post_transient_start;
    }
    if let Some(v) = m.degraded_threshold {
        cfg.metrics.degraded_threshold = v;
    }
    if let Some(v) = m.settle_threshold {
        cfg.metrics.settle_threshold = v;
    }
    if let Some(l) = raw.logging {
        if let Some(v) = l.decimation {
            cfg.log_decimation = v;
        }
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Parse a configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    build(raw)
}

/// Parse a configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: PathBuf::from(path),
        source: e,
    })?;
    parse_config_str(&text)
}

/// Load `path` if given, the built-in defaults otherwise.
pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, ConfigError> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(ScenarioConfig::default()),
    }
}

/// The annotated default configuration; parsing it reproduces
/// [`ScenarioConfig::default`] exactly.
pub fn default_config_toml() -> &'static str {
    DEFAULT_CONFIG
}

const DEFAULT_CONFIG: &str = r#"# Scenario configuration. Every key is optional; an empty file runs the
# benchmark scenario (smooth adaptive observer, noise-free, 150 s at 10 kHz).

# Observer closing the loop: "iandi" (smooth adaptive) or "slidingmode"
# (super-twisting with covariance-weighted adaptation).
observer = "iandi"

# Seed for the measurement-noise stream.
seed = 0

# Noise amplitude a in y = x1 (1 + a w), w uniform on [-1, 1]. 0 disables.
noise_amplitude = 0.0

# Use the additive form y = x1 + a w instead.
noise_additive = false

# Noise sample-and-hold rate in Hz; at most the grid rate 1/step.
measurement_rate = 1000.0

[plant]
theta1 = 0.4     # viscous friction level
theta2 = 1.0     # Coulomb friction level
vartheta = 100.0 # steepness of the friction nonlinearity

[controller]
alpha1 = 0.49 # position-error gain (double closed-loop pole at -0.7)
alpha2 = 1.4  # velocity-error gain

[integrator]
method = "rk4"      # "euler" or "rk4"
step = 1e-4
t_end = 150.0
sign_mode = "exact" # "exact" or "boundary_layer"
# boundary_layer_eps = 0.01 # required when sign_mode = "boundary_layer"

[observer_gains]
k1 = 1.0 # smooth-observer gain (iandi only)
# Sliding-mode settings (slidingmode only):
# c1 = 0.5
# c2 = 25.0
# gamma0 = [500.0, 500.0] # initial adaptation-covariance diagonal
# theta_bar = [0.2, 0.5]  # nominal parameter guess
# regressor_uses_plant_velocity = true
# innovation_uses_plant_position = false

[initial]
x1 = 0.1
x2 = 0.5
# Smooth-observer integrator states (iandi only):
x2_i = 0.0
theta1_i = 0.0
theta2_i = 0.0
# Sliding-mode initial values (slidingmode only):
# x1_hat = 0.0
# x2_hat = 0.1
# delta_theta = [-0.7, -9.806852821501208] # omit to match the smooth observer's start

[metrics]
# post_transient_start = 75.0 # default: half the horizon
degraded_threshold = 0.05 # sweep verdict: post-transient velocity-error bound
settle_threshold = 0.01   # tracking band for the settle-time metric

[[reference]]
t_start = 0.0
kind = "hold"
value = 1.0

[[reference]]
t_start = 50.0
kind = "hold"
value = 1.5

[[reference]]
t_start = 90.0
kind = "ramp"
value_from = 1.5
value_to = 0.5

[[reference]]
t_start = 110.0
kind = "hold"
value = 0.5

[logging]
decimation = 10 # keep every n-th grid point in the log
"#;
