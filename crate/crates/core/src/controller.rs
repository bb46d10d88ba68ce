//! Tracking controllers: the full-information ideal law and its
//! certainty-equivalence counterpart fed by observer outputs, plus the
//! perturbation diagnostics that separate the two.

use crate::plant::{plant_deriv, PlantParams, PlantState};
use crate::reference::ReferenceSample;
use crate::error::ConfigError;

/// PD gains on position and velocity error. The defaults place a double
/// closed-loop pole at -0.7.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerGains {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        ControllerGains { alpha1: 0.49, alpha2: 1.4 }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("controller.alpha1", self.alpha1), ("controller.alpha2", self.alpha2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::field(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Full-information law: cancel friction exactly and impose linear error
/// dynamics `e1'' + alpha2 e1' + alpha1 e1 = 0`.
pub fn ideal_control(
    s: &PlantState,
    r: &ReferenceSample,
    p: &PlantParams,
    g: &ControllerGains,
) -> f64 {
    p.theta1 * s.x2 + p.theta2 * (p.vartheta * s.x2).tanh() + r.rddot
        - g.alpha1 * (s.x1 - r.r)
        - g.alpha2 * (s.x2 - r.rdot)
}

/// Certainty-equivalence law: the ideal law with every unavailable quantity
/// replaced by its estimate (and the position by its measurement). Written
/// term-for-term like [`ideal_control`] so that feeding it perfect estimates
/// reproduces the ideal input bit for bit.
pub fn ce_control(
    x1_meas: f64,
    x2_hat: f64,
    theta_hat: [f64; 2],
    r: &ReferenceSample,
    vartheta: f64,
    g: &ControllerGains,
) -> f64 {
    theta_hat[0] * x2_hat + theta_hat[1] * (vartheta * x2_hat).tanh() + r.rddot
        - g.alpha1 * (x1_meas - r.r)
        - g.alpha2 * (x2_hat - r.rdot)
}

/// The perturbation entering the tracking-error dynamics under the
/// certainty-equivalence law, computed two independent ways.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonDiagnostics {
    /// Direct evaluation of the published closed-form expression.
    pub formula: f64,
    /// Reconstruction from the closed-loop dynamics themselves: apply the
    /// certainty-equivalence input to the true plant and read off
    /// `e2' + alpha1 e1 + alpha2 e2`.
    pub residual: f64,
}

/// Evaluate both perturbation routes at one closed-loop instant.
///
/// The two routes deliberately disagree in general (the velocity-error
/// feedback term enters them with opposite sign); logging both side by side
/// is the point. The residual route is reference-invariant — the reference
/// terms inside the input cancel against the error definition — so it is
/// evaluated against a zero reference without loss.
pub fn epsilon_t(
    s: &PlantState,
    x2_hat: f64,
    theta_hat: [f64; 2],
    p: &PlantParams,
    g: &ControllerGains,
) -> EpsilonDiagnostics {
    let vt = p.vartheta;
    let x2_tilde = x2_hat - s.x2;
    let formula = p.theta1 * x2_tilde
        + (theta_hat[0] - p.theta1) * (s.x2 + x2_tilde)
        + (theta_hat[1] - p.theta2) * (vt * (s.x2 + x2_tilde)).tanh()
        + p.theta2 * ((vt * (s.x2 + x2_tilde)).tanh() - (vt * s.x2).tanh())
        + g.alpha2 * x2_tilde;

    let r0 = ReferenceSample { r: 0.0, rdot: 0.0, rddot: 0.0 };
    let u = ce_control(s.x1, x2_hat, theta_hat, &r0, vt, g);
    let d = plant_deriv(s, u, p);
    let residual = d.x2_dot + g.alpha1 * s.x1 + g.alpha2 * s.x2;

    EpsilonDiagnostics { formula, residual }
}
