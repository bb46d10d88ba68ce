//! Closed-loop scenario driver: wires plant, reference, observer and
//! controller together on a fixed time grid, injects measurement noise,
//! streams metrics over the full grid, and returns a decimated log.
//!
//! Runs are deterministic end to end: the only randomness is the measurement
//! noise, drawn from a counter-based generator seeded explicitly, and the
//! grid is `t_k = k * step_h` with no accumulation drift.

use std::cell::Cell;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::controller::{ce_control, epsilon_t, ideal_control, ControllerGains, EpsilonDiagnostics};
use crate::error::{ConfigError, SimError};
use crate::observers::{
    gamma_is_spd, logcosh, symmetrize, IandIObserver, IandIState, SmObserver, SmState,
};
use crate::plant::{plant_deriv, PlantParams, PlantState};
use crate::reference::{PiecewiseReference, ReferenceSample};
use crate::runlog::RunLog;
use crate::sim::{integrate_step, IntegratorConfig, Method, SignMode, StateVector};

/// Noise amplitude used by noisy sweeps when the base scenario itself is
/// noise-free.
pub const DEFAULT_NOISE_AMPLITUDE: f64 = 3e-4;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Gains and initial integrator values for the smooth adaptive observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IandISetup {
    pub k1: f64,
    pub x2_i0: f64,
    pub theta1_i0: f64,
    pub theta2_i0: f64,
}

impl Default for IandISetup {
    fn default() -> Self {
        IandISetup { k1: 1.0, x2_i0: 0.0, theta1_i0: 0.0, theta2_i0: 0.0 }
    }
}

/// Gains, initial values and wiring options for the sliding-mode observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmSetup {
    pub c1: f64,
    pub c2: f64,
    /// Initial covariance diagonal.
    pub gamma0: [f64; 2],
    /// Nominal parameter guess the adaptation is anchored to.
    pub theta_bar: [f64; 2],
    pub x1_hat0: f64,
    pub x2_hat0: f64,
    /// Initial parameter offset; `None` picks [`SmSetup::matched_delta_theta0`].
    pub delta_theta0: Option<[f64; 2]>,
    /// Baseline wiring feeds the plant's actual velocity into the friction
    /// regressor; switch off to make the observer fully self-contained.
    pub regressor_uses_plant_velocity: bool,
    /// Baseline wiring drives the injection from the measured (noisy)
    /// position; switch on to bypass the noise for ablation runs.
    pub innovation_uses_plant_position: bool,
}

impl Default for SmSetup {
    fn default() -> Self {
        SmSetup {
            c1: 0.5,
            c2: 25.0,
            gamma0: [500.0, 500.0],
            theta_bar: [0.2, 0.5],
            x1_hat0: 0.0,
            x2_hat0: 0.1,
            delta_theta0: None,
            regressor_uses_plant_velocity: true,
            innovation_uses_plant_position: false,
        }
    }
}

impl SmSetup {
    /// Offset that makes the published initial estimates coincide with what
    /// the smooth observer publishes from zero integrator state at unit
    /// gain, so the two schemes start the comparison from the same numbers.
    pub fn matched_delta_theta0(&self, vartheta: f64) -> [f64; 2] {
        [
            -vartheta / 2.0 * self.x2_hat0 * self.x2_hat0 - self.theta_bar[0],
            -logcosh(vartheta * self.x2_hat0) - self.theta_bar[1],
        ]
    }

    fn resolved_delta0(&self, vartheta: f64) -> [f64; 2] {
        self.delta_theta0
            .unwrap_or_else(|| self.matched_delta_theta0(vartheta))
    }
}

/// Which observer closes the loop, with its whole setup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObserverChoice {
    IandI(IandISetup),
    SlidingMode(SmSetup),
}

impl ObserverChoice {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ObserverChoice::IandI(_) => "iandi",
            ObserverChoice::SlidingMode(_) => "slidingmode",
        }
    }
}

/// Measurement-noise model: the position sample is corrupted by a uniform
/// factor held constant between measurement instants (sample-and-hold at
/// `measurement_rate`), either relative (`x1 * (1 + a w)`) or, optionally,
/// absolute (`x1 + a w`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub amplitude: f64,
    pub additive: bool,
    /// Measurement sampling rate in Hz; must not exceed the grid rate.
    pub measurement_rate: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { amplitude: 0.0, additive: false, measurement_rate: 1000.0 }
    }
}

/// Windows and thresholds for the run metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsConfig {
    /// Start of the evaluation window; `None` means half the horizon.
    pub post_transient_start: Option<f64>,
    /// Post-transient velocity-estimate error above which a sweep run counts
    /// as degraded.
    pub degraded_threshold: f64,
    /// Tracking-error band used for the settling-time metric.
    pub settle_threshold: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            post_transient_start: None,
            degraded_threshold: 0.05,
            settle_threshold: 0.01,
        }
    }
}

/// Complete description of one closed-loop run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub plant: PlantParams,
    pub gains: ControllerGains,
    pub integrator: IntegratorConfig,
    pub reference: PiecewiseReference,
    pub observer: ObserverChoice,
    pub noise: NoiseConfig,
    pub seed: u64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub metrics: MetricsConfig,
    /// Keep every n-th grid point in the log (metrics always use the full
    /// grid).
    pub log_decimation: u32,
}

impl Default for ScenarioConfig {
    /// The benchmark scenario: smooth adaptive observer, noise-free, 150 s
    /// at 10 kHz.
    fn default() -> Self {
        ScenarioConfig {
            plant: PlantParams::default(),
            gains: ControllerGains::default(),
            integrator: IntegratorConfig {
                method: Method::Rk4,
                step_h: 1e-4,
                t_end: 150.0,
                sign_mode: SignMode::Exact,
            },
            reference: PiecewiseReference::default(),
            observer: ObserverChoice::IandI(IandISetup::default()),
            noise: NoiseConfig::default(),
            seed: 0,
            x1_0: 0.1,
            x2_0: 0.5,
            metrics: MetricsConfig::default(),
            log_decimation: 10,
        }
    }
}

impl ScenarioConfig {
    /// The benchmark scenario with the sliding-mode observer instead.
    pub fn default_sliding_mode() -> Self {
        ScenarioConfig {
            observer: ObserverChoice::SlidingMode(SmSetup::default()),
            ..ScenarioConfig::default()
        }
    }

    /// Evaluation-window start actually in effect.
    pub fn post_transient_start(&self) -> f64 {
        self.metrics
            .post_transient_start
            .unwrap_or(self.integrator.t_end / 2.0)
    }

    /// Grid steps between measurement samples.
    pub fn measurement_period_steps(&self) -> u64 {
        (1.0 / (self.noise.measurement_rate * self.integrator.step_h)).round() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.plant.validate()?;
        self.gains.validate()?;
        self.integrator.validate()?;
        if !(self.noise.amplitude.is_finite() && self.noise.amplitude >= 0.0) {
            return Err(ConfigError::field("noise_amplitude", "must be finite and >= 0"));
        }
        if !(self.noise.measurement_rate.is_finite() && self.noise.measurement_rate > 0.0) {
            return Err(ConfigError::field("measurement_rate", "must be finite and > 0"));
        }
        if self.noise.measurement_rate * self.integrator.step_h > 1.0 + 1e-9
            || self.measurement_period_steps() < 1
        {
            return Err(ConfigError::field(
                "measurement_rate",
                "cannot exceed the integration grid rate (1 / integrator.step)",
            ));
        }
        if let Some(w) = self.metrics.post_transient_start {
            if !(w.is_finite() && (0.0..self.integrator.t_end).contains(&w)) {
                return Err(ConfigError::field(
                    "metrics.post_transient_start",
                    "must lie in [0, integrator.t_end)",
                ));
            }
        }
        for (name, v) in [
            ("metrics.degraded_threshold", self.metrics.degraded_threshold),
            ("metrics.settle_threshold", self.metrics.settle_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::field(name, "must be finite and > 0"));
            }
        }
        if self.log_decimation < 1 {
            return Err(ConfigError::field("logging.decimation", "must be >= 1"));
        }
        if !(self.x1_0.is_finite() && self.x2_0.is_finite()) {
            return Err(ConfigError::field("initial", "state must be finite"));
        }
        match &self.observer {
            ObserverChoice::IandI(s) => {
                if !(s.k1.is_finite() && s.k1 > 0.0) {
                    return Err(ConfigError::field("observer_gains.k1", "must be finite and > 0"));
                }
                for (name, v) in [
                    ("initial.x2_i", s.x2_i0),
                    ("initial.theta1_i", s.theta1_i0),
                    ("initial.theta2_i", s.theta2_i0),
                ] {
                    if !v.is_finite() {
                        return Err(ConfigError::field(name, "must be finite"));
                    }
                }
            }
            ObserverChoice::SlidingMode(s) => {
                for (name, v) in [("observer_gains.c1", s.c1), ("observer_gains.c2", s.c2)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(ConfigError::field(name, "must be finite and > 0"));
                    }
                }
                if !(s.gamma0.iter().all(|g| g.is_finite() && *g > 0.0)) {
                    return Err(ConfigError::field(
                        "observer_gains.gamma0",
                        "diagonal entries must be finite and > 0",
                    ));
                }
                if !s.theta_bar.iter().all(|v| v.is_finite()) {
                    return Err(ConfigError::field("observer_gains.theta_bar", "must be finite"));
                }
                let mut init = vec![("initial.x1_hat", s.x1_hat0), ("initial.x2_hat", s.x2_hat0)];
                if let Some(d) = s.delta_theta0 {
                    init.push(("initial.delta_theta", d[0]));
                    init.push(("initial.delta_theta", d[1]));
                }
                for (name, v) in init {
                    if !v.is_finite() {
                        return Err(ConfigError::field(name, "must be finite"));
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Measurement noise
// ---------------------------------------------------------------------------

/// Sample-and-hold position measurement channel. `redraw` advances to a new
/// noise sample; `measure` applies the held sample. With zero amplitude the
/// channel is exactly the identity.
pub struct NoiseStream {
    rng: ChaCha12Rng,
    amplitude: f64,
    additive: bool,
    w: f64,
}

impl NoiseStream {
    pub fn new(seed: u64, noise: &NoiseConfig) -> Self {
        NoiseStream {
            rng: ChaCha12Rng::seed_from_u64(seed),
            amplitude: noise.amplitude,
            additive: noise.additive,
            w: 0.0,
        }
    }

    /// Draw the next noise sample, uniform on [-1, 1].
    pub fn redraw(&mut self) {
        self.w = self.rng.random_range(-1.0..=1.0);
    }

    /// Apply the held sample to a position value.
    pub fn measure(&self, x1: f64) -> f64 {
        if self.amplitude == 0.0 {
            return x1;
        }
        if self.additive {
            x1 + self.amplitude * self.w
        } else {
            x1 * (1.0 + self.amplitude * self.w)
        }
    }
}

// ---------------------------------------------------------------------------
// Run products
// ---------------------------------------------------------------------------

/// Everything known about one grid instant; what the log keeps and what
/// probes see.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSnapshot {
    pub t: f64,
    pub reference: ReferenceSample,
    pub x1: f64,
    pub x2: f64,
    pub y: f64,
    pub x1_hat: Option<f64>,
    pub x2_hat: f64,
    pub theta_hat: [f64; 2],
    pub u: f64,
    pub u_star: f64,
    pub eps: EpsilonDiagnostics,
    pub observer: ObserverInternals,
}

/// Observer-specific internals exposed to probes (invariant checks).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObserverInternals {
    IandI { x2_i: f64, theta1_i: f64, theta2_i: f64 },
    SlidingMode { delta_theta: [f64; 2], gamma: [[f64; 2]; 2] },
}

/// How and when a run died.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub t: f64,
    pub reason: String,
}

/// Scalar summary of a run. Error metrics are evaluated on the full grid
/// from `window_start` onward; settling uses the whole horizon. All error
/// fields are NaN when the run died before producing any window samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub rms_tracking_error: f64,
    pub max_tracking_error: f64,
    /// Largest |x2_hat - x2| in the window.
    pub max_observer_error: f64,
    /// Total variation of the control signal over the window, summed on the
    /// full grid (decimation does not touch it).
    pub control_total_variation: f64,
    /// theta_hat - theta at the final computed instant.
    pub theta_error_final: [f64; 2],
    /// Earliest instant after which |x1 - r| stays within the settle band.
    pub settle_time: Option<f64>,
    pub diverged: Option<Divergence>,
    pub window_start: f64,
}

/// Log plus metrics for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub log: RunLog,
    pub metrics: Metrics,
}

struct MetricsAcc {
    window_start: f64,
    settle_threshold: f64,
    theta_true: [f64; 2],
    sum_sq: f64,
    n: u64,
    max_track: f64,
    max_obs: f64,
    tv: f64,
    prev_u: Option<f64>,
    settle_candidate: Option<f64>,
    theta_err_last: [f64; 2],
}

impl MetricsAcc {
    fn new(cfg: &ScenarioConfig) -> Self {
        MetricsAcc {
            window_start: cfg.post_transient_start(),
            settle_threshold: cfg.metrics.settle_threshold,
            theta_true: [cfg.plant.theta1, cfg.plant.theta2],
            sum_sq: 0.0,
            n: 0,
            max_track: 0.0,
            max_obs: 0.0,
            tv: 0.0,
            prev_u: None,
            settle_candidate: None,
            theta_err_last: [f64::NAN, f64::NAN],
        }
    }

    fn record(&mut self, s: &StepSnapshot) {
        let e1 = s.x1 - s.reference.r;
        if e1.abs() > self.settle_threshold {
            self.settle_candidate = None;
        } else if self.settle_candidate.is_none() {
            self.settle_candidate = Some(s.t);
        }
        if s.t >= self.window_start {
            self.sum_sq += e1 * e1;
            self.n += 1;
            self.max_track = self.max_track.max(e1.abs());
            self.max_obs = self.max_obs.max((s.x2_hat - s.x2).abs());
            if let Some(p) = self.prev_u {
                self.tv += (s.u - p).abs();
            }
            self.prev_u = Some(s.u);
        }
        self.theta_err_last = [
            s.theta_hat[0] - self.theta_true[0],
            s.theta_hat[1] - self.theta_true[1],
        ];
    }

    fn finish(self, diverged: Option<Divergence>) -> Metrics {
        let empty = self.n == 0;
        let nan_if_empty = |v: f64| if empty { f64::NAN } else { v };
        Metrics {
            rms_tracking_error: if empty {
                f64::NAN
            } else {
                (self.sum_sq / self.n as f64).sqrt()
            },
            max_tracking_error: nan_if_empty(self.max_track),
            max_observer_error: nan_if_empty(self.max_obs),
            control_total_variation: nan_if_empty(self.tv),
            theta_error_final: self.theta_err_last,
            settle_time: if diverged.is_some() { None } else { self.settle_candidate },
            diverged,
            window_start: self.window_start,
        }
    }
}

// ---------------------------------------------------------------------------
// The run loop
// ---------------------------------------------------------------------------

static II_SCHEMA: &[&str] = &["x1", "x2", "x2_i", "theta1_i", "theta2_i"];
static SM_SCHEMA: &[&str] = &[
    "x1", "x2", "x1_hat", "x2_hat", "dtheta1", "dtheta2", "gamma11", "gamma12", "gamma21",
    "gamma22",
];

enum ObserverRt<'a> {
    IandI { ob: IandIObserver, setup: &'a IandISetup },
    Sm { ob: SmObserver, setup: &'a SmSetup },
}

struct Runner<'a> {
    cfg: &'a ScenarioConfig,
    observer: ObserverRt<'a>,
    sign_mode: SignMode,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        let observer = match &cfg.observer {
            ObserverChoice::IandI(setup) => ObserverRt::IandI {
                ob: IandIObserver { k1: setup.k1 },
                setup,
            },
            ObserverChoice::SlidingMode(setup) => ObserverRt::Sm {
                ob: SmObserver { c1: setup.c1, c2: setup.c2, theta_bar: setup.theta_bar },
                setup,
            },
        };
        Runner { cfg, observer, sign_mode: cfg.integrator.sign_mode }
    }

    fn initial_state(&self) -> StateVector {
        match &self.observer {
            ObserverRt::IandI { setup, .. } => StateVector::new(
                II_SCHEMA,
                &[self.cfg.x1_0, self.cfg.x2_0, setup.x2_i0, setup.theta1_i0, setup.theta2_i0],
            ),
            ObserverRt::Sm { setup, .. } => {
                let d0 = setup.resolved_delta0(self.cfg.plant.vartheta);
                StateVector::new(
                    SM_SCHEMA,
                    &[
                        self.cfg.x1_0,
                        self.cfg.x2_0,
                        setup.x1_hat0,
                        setup.x2_hat0,
                        d0[0],
                        d0[1],
                        setup.gamma0[0],
                        0.0,
                        0.0,
                        setup.gamma0[1],
                    ],
                )
            }
        }
    }

    fn sm_state(x: &StateVector) -> SmState {
        SmState {
            x1_hat: x[2],
            x2_hat: x[3],
            delta_theta: [x[4], x[5]],
            gamma: [[x[6], x[7]], [x[8], x[9]]],
        }
    }

    /// Everything the log and the metrics need at one grid point.
    fn snapshot(&self, t: f64, x: &StateVector, noise: &NoiseStream) -> StepSnapshot {
        let p = &self.cfg.plant;
        let g = &self.cfg.gains;
        let rs = self.cfg.reference.eval(t);
        let plant = PlantState { x1: x[0], x2: x[1] };
        let y = noise.measure(plant.x1);
        let (x1_hat, x2_hat, theta_hat, internals) = match &self.observer {
            ObserverRt::IandI { ob, .. } => {
                let s = IandIState { x2_i: x[2], theta1_i: x[3], theta2_i: x[4] };
                let out = ob.outputs(&s, y, p.vartheta);
                (
                    None,
                    out.x2_hat,
                    [out.theta1_hat, out.theta2_hat],
                    ObserverInternals::IandI { x2_i: s.x2_i, theta1_i: s.theta1_i, theta2_i: s.theta2_i },
                )
            }
            ObserverRt::Sm { ob, .. } => {
                let s = Self::sm_state(x);
                (
                    Some(s.x1_hat),
                    s.x2_hat,
                    ob.theta_hat(&s),
                    ObserverInternals::SlidingMode { delta_theta: s.delta_theta, gamma: s.gamma },
                )
            }
        };
        let u = ce_control(y, x2_hat, theta_hat, &rs, p.vartheta, g);
        StepSnapshot {
            t,
            reference: rs,
            x1: plant.x1,
            x2: plant.x2,
            y,
            x1_hat,
            x2_hat,
            theta_hat,
            u,
            u_star: ideal_control(&plant, &rs, p, g),
            eps: epsilon_t(&plant, x2_hat, theta_hat, p, g),
            observer: internals,
        }
    }

    /// Combined closed-loop vector field. Observer failures (degenerate
    /// covariance) cannot be returned through the field signature, so they
    /// are parked in `stash` and the step is discarded by the caller.
    fn field(
        &self,
        t: f64,
        x: &StateVector,
        noise: &NoiseStream,
        stash: &Cell<Option<SimError>>,
    ) -> StateVector {
        let p = &self.cfg.plant;
        let g = &self.cfg.gains;
        let rs = self.cfg.reference.eval(t);
        let plant = PlantState { x1: x[0], x2: x[1] };
        let y = noise.measure(plant.x1);
        match &self.observer {
            ObserverRt::IandI { ob, .. } => {
                let s = IandIState { x2_i: x[2], theta1_i: x[3], theta2_i: x[4] };
                let out = ob.outputs(&s, y, p.vartheta);
                let u = ce_control(y, out.x2_hat, [out.theta1_hat, out.theta2_hat], &rs, p.vartheta, g);
                let pd = plant_deriv(&plant, u, p);
                let od = ob.deriv(&s, y, u, p.vartheta);
                StateVector::new(
                    II_SCHEMA,
                    &[pd.x1_dot, pd.x2_dot, od.x2_i_dot, od.theta1_i_dot, od.theta2_i_dot],
                )
            }
            ObserverRt::Sm { ob, setup } => {
                let s = Self::sm_state(x);
                let theta_hat = ob.theta_hat(&s);
                let u = ce_control(y, s.x2_hat, theta_hat, &rs, p.vartheta, g);
                let pd = plant_deriv(&plant, u, p);
                let x1_inn = if setup.innovation_uses_plant_position { plant.x1 } else { y };
                let x2_reg = if setup.regressor_uses_plant_velocity { plant.x2 } else { s.x2_hat };
                match ob.deriv(t, &s, x1_inn, x2_reg, u, p.vartheta, self.sign_mode) {
                    Ok(od) => StateVector::new(
                        SM_SCHEMA,
                        &[
                            pd.x1_dot,
                            pd.x2_dot,
                            od.x1_hat_dot,
                            od.x2_hat_dot,
                            od.delta_theta_dot[0],
                            od.delta_theta_dot[1],
                            od.gamma_dot[0][0],
                            od.gamma_dot[0][1],
                            od.gamma_dot[1][0],
                            od.gamma_dot[1][1],
                        ],
                    ),
                    Err(e) => {
                        stash.set(Some(e));
                        StateVector::new(SM_SCHEMA, &[0.0; 10])
                    }
                }
            }
        }
    }
}

/// Run a scenario and also hand every *logged* snapshot to `probe` (used by
/// invariant checks; the plain [`run_scenario`] passes a no-op).
pub fn run_scenario_with_probe(
    cfg: &ScenarioConfig,
    mut probe: impl FnMut(&StepSnapshot),
) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    let runner = Runner::new(cfg);
    let integ = &cfg.integrator;
    let h = integ.step_h;
    let n = integ.n_steps();
    let m = cfg.measurement_period_steps();
    let decim = cfg.log_decimation as u64;
    let is_sm = matches!(cfg.observer, ObserverChoice::SlidingMode(_));

    let label = format!(
        "{} {}",
        cfg.observer.kind_name(),
        if cfg.noise.amplitude > 0.0 { "noisy" } else { "noise-free" }
    );
    let mut log = RunLog::new(label, cfg.plant, is_sm, cfg.log_decimation);
    log.reserve((n / decim + 2) as usize);

    let mut noise = NoiseStream::new(cfg.seed, &cfg.noise);
    let mut state = runner.initial_state();
    let mut acc = MetricsAcc::new(cfg);
    let mut diverged: Option<Divergence> = None;
    let stash: Cell<Option<SimError>> = Cell::new(None);

    for k in 0..=n {
        let t = k as f64 * h;
        if k % m == 0 {
            noise.redraw();
        }
        let snap = runner.snapshot(t, &state, &noise);
        acc.record(&snap);
        if k % decim == 0 {
            log.push(&snap);
            probe(&snap);
            // Covariance health check at log cadence: catches slow decay
            // into singularity that the per-stage check would only hit later.
            if let ObserverInternals::SlidingMode { gamma, .. } = &snap.observer {
                if !gamma_is_spd(gamma) {
                    diverged = Some(Divergence {
                        t,
                        reason: SimError::CovarianceDegenerate { t }.to_string(),
                    });
                    break;
                }
            }
        }
        if k == n {
            break;
        }
        let next = integrate_step(
            |tt, xx| runner.field(tt, xx, &noise, &stash),
            &state,
            t,
            integ,
        );
        if let Some(e) = stash.take() {
            diverged = Some(Divergence { t, reason: e.to_string() });
            break;
        }
        match next {
            Ok(mut s) => {
                if is_sm {
                    // Keep the integrated covariance exactly symmetric.
                    let mut g = [[s[6], s[7]], [s[8], s[9]]];
                    symmetrize(&mut g);
                    s[7] = g[0][1];
                    s[8] = g[1][0];
                }
                state = s;
            }
            Err(e) => {
                diverged = Some(Divergence { t, reason: e.to_string() });
                break;
            }
        }
    }

    Ok(RunResult { log, metrics: acc.finish(diverged) })
}

/// Run one closed-loop scenario to completion (or divergence, which is
/// recorded in the metrics rather than returned as an error).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
    run_scenario_with_probe(cfg, |_| {})
}

// ---------------------------------------------------------------------------
// Derived scalar analyses
// ---------------------------------------------------------------------------

/// Total variation `sum |v[i+1] - v[i]|` of a sampled signal.
pub fn total_variation(series: &[f64]) -> Result<f64, SimError> {
    if series.len() < 2 {
        return Err(SimError::InvalidInput(
            "total variation needs at least two samples".into(),
        ));
    }
    Ok(series.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Worst-case decay-rate bound of the smooth observer's internal error
/// function, `vartheta^2 (k1 + theta1 + theta2 vartheta)`: the price of
/// raising `k1` shows up linearly here while the noise gain rises with
/// `k1` too.
pub fn lyapunov_rate(k1: f64, p: &PlantParams) -> f64 {
    p.vartheta * p.vartheta * (k1 + p.theta1 + p.theta2 * p.vartheta)
}

/// One row of a [`k1_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub k1: f64,
    pub noisy: bool,
    /// Not diverged and post-transient observer error within the degraded
    /// threshold.
    pub stable: bool,
    pub metrics: Metrics,
}

/// Re-run the smooth-observer scenario across a list of `k1` gains, in
/// parallel, each run seeded identically from the base config. With `noisy`
/// the base scenario's noise amplitude is used, or [`DEFAULT_NOISE_AMPLITUDE`]
/// if the base is noise-free; without it the runs are exactly noise-free.
/// Individual divergences are recorded in their row, never propagated.
pub fn k1_sweep(
    k1_values: &[f64],
    noisy: bool,
    base: &ScenarioConfig,
) -> Result<Vec<SweepRow>, ConfigError> {
    for (i, k1) in k1_values.iter().enumerate() {
        if !(k1.is_finite() && *k1 > 0.0) {
            return Err(ConfigError::field(
                format!("k1[{i}]"),
                "sweep gains must be finite and > 0",
            ));
        }
    }
    let base_setup = match &base.observer {
        ObserverChoice::IandI(s) => *s,
        ObserverChoice::SlidingMode(_) => IandISetup::default(),
    };
    let amplitude = if noisy {
        if base.noise.amplitude > 0.0 { base.noise.amplitude } else { DEFAULT_NOISE_AMPLITUDE }
    } else {
        0.0
    };
    k1_values
        .par_iter()
        .map(|&k1| {
            let mut cfg = base.clone();
            cfg.observer = ObserverChoice::IandI(IandISetup { k1, ..base_setup });
            cfg.noise.amplitude = amplitude;
            // The sweep only consumes metrics; keep the discarded logs small.
            cfg.log_decimation = cfg.log_decimation.max(100);
            let res = run_scenario(&cfg)?;
            let m = res.metrics;
            let degraded =
                m.diverged.is_some() || !(m.max_observer_error <= cfg.metrics.degraded_threshold);
            Ok(SweepRow { k1, noisy, stable: !degraded, metrics: m })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&[0.0, 1.0, 0.5]).unwrap(), 1.5);
        assert_eq!(total_variation(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!(total_variation(&[1.0]).is_err());
        // Monotone series: variation collapses to the endpoint gap.
        let ramp: Vec<f64> = (0..100).map(|i| (i as f64).sqrt()).collect();
        let tv = total_variation(&ramp).unwrap();
        assert!((tv - (ramp[99] - ramp[0])).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_rate_examples() {
        let p = PlantParams::default();
        // Exact in f64 at the default parameters.
        assert_eq!(lyapunov_rate(1.0, &p), 1.014e6);
        // Limit toward zero gain.
        assert!((lyapunov_rate(1e-12, &p) - 1.004e6).abs() < 1e-3);
        // Strictly increasing in k1.
        let mut prev = lyapunov_rate(0.1, &p);
        for k1 in [1.0, 10.0, 44.0, 88.0, 150.0] {
            let r = lyapunov_rate(k1, &p);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn noise_stream_zero_amplitude_is_identity() {
        let mut ns = NoiseStream::new(7, &NoiseConfig { amplitude: 0.0, ..Default::default() });
        for i in 0..50 {
            ns.redraw();
            let x = 0.1 * i as f64 - 2.0;
            assert_eq!(ns.measure(x).to_bits(), x.to_bits());
        }
    }

    #[test]
    fn noise_stream_bounds_and_hold() {
        let cfgn = NoiseConfig { amplitude: 3e-4, ..Default::default() };
        let mut ns = NoiseStream::new(42, &cfgn);
        let mut seen_nonzero = false;
        for _ in 0..200 {
            ns.redraw();
            let y = ns.measure(1.5);
            assert!((y - 1.5).abs() <= 3e-4 * 1.5 + 1e-18);
            // Held between redraws.
            assert_eq!(ns.measure(1.5).to_bits(), y.to_bits());
            seen_nonzero |= y != 1.5;
        }
        assert!(seen_nonzero);
        // Additive variant bounds do not scale with the signal.
        let mut ns = NoiseStream::new(
            42,
            &NoiseConfig { amplitude: 3e-4, additive: true, ..Default::default() },
        );
        for _ in 0..200 {
            ns.redraw();
            assert!((ns.measure(100.0) - 100.0).abs() <= 3e-4 + 1e-18);
        }
    }

    #[test]
    fn noise_stream_is_seed_deterministic() {
        let cfgn = NoiseConfig { amplitude: 1e-3, ..Default::default() };
        let draw = |seed: u64| {
            let mut ns = NoiseStream::new(seed, &cfgn);
            (0..16)
                .map(|_| {
                    ns.redraw();
                    ns.measure(1.0)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn short_run_has_expected_grid_and_stays_sane() {
        let mut cfg = ScenarioConfig::default();
        cfg.integrator.t_end = 2.0;
        cfg.log_decimation = 1;
        let res = run_scenario(&cfg).unwrap();
        assert_eq!(res.log.len(), 20_001);
        assert_eq!(res.log.t[0], 0.0);
        assert!((res.log.t[20_000] - 2.0).abs() < 1e-9);
        assert!(res.metrics.diverged.is_none());
        // Velocity-estimate identity holds at the first instant by
        // construction: x2_hat(0) = x2_i0 + k1 x1(0).
        assert_eq!(res.log.x2_hat[0], 0.1);
    }

    #[test]
    fn default_configs_validate() {
        assert!(ScenarioConfig::default().validate().is_ok());
        assert!(ScenarioConfig::default_sliding_mode().validate().is_ok());
        let mut bad = ScenarioConfig::default();
        bad.noise.amplitude = -1.0;
        match bad.validate().unwrap_err() {
            ConfigError::Field { field, .. } => assert_eq!(field, "noise_amplitude"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn measurement_rate_must_fit_the_grid() {
        let mut cfg = ScenarioConfig::default();
        cfg.noise.measurement_rate = 20_000.0; // grid is 10 kHz
        match cfg.validate().unwrap_err() {
            ConfigError::Field { field, .. } => assert_eq!(field, "measurement_rate"),
            other => panic!("unexpected error {other:?}"),
        }
        let mut cfg = ScenarioConfig::default();
        cfg.noise.measurement_rate = 10_000.0;
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.measurement_period_steps(), 1);
    }

    #[test]
    fn blowup_is_captured_in_metrics_not_an_error() {
        // Euler at a grossly unstable step size must overflow, and the run
        // reports it instead of failing.
        let mut cfg = ScenarioConfig::default();
        cfg.integrator.method = Method::Euler;
        cfg.integrator.step_h = 1.0;
        cfg.integrator.t_end = 400.0;
        cfg.noise.measurement_rate = 1.0;
        let res = run_scenario(&cfg).unwrap();
        let d = res.metrics.diverged.expect("run should have blown up");
        assert!(d.reason.contains("non-finite"), "reason: {}", d.reason);
        assert!(d.t <= 400.0);
        assert!(res.metrics.settle_time.is_none());
    }

    #[test]
    fn sweep_rejects_nonpositive_gains_and_keeps_order() {
        let base = ScenarioConfig::default();
        assert!(k1_sweep(&[1.0, -2.0], false, &base).is_err());
        let mut cfg = base.clone();
        cfg.integrator.t_end = 1.0;
        let rows = k1_sweep(&[2.0, 1.0, 3.0], false, &cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.k1).collect::<Vec<_>>(), vec![2.0, 1.0, 3.0]);
        assert!(rows.iter().all(|r| !r.noisy));
    }
}
