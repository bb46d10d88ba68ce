//! The two velocity/parameter observers under comparison.
//!
//! Both work from the measured position only and feed the same
//! certainty-equivalence control law:
//!
//! * [`IandIObserver`] — a smooth adaptive observer whose estimates are
//!   integrator states plus algebraic correction terms in the measured
//!   output, giving proportional-plus-integral adaptation without velocity
//!   measurements.
//! * [`SmObserver`] — a super-twisting sliding-mode observer whose relay
//!   injection also drives a least-squares style parameter update with a
//!   decaying covariance matrix.

use crate::error::SimError;
use crate::sim::{sgn, SignMode};

/// Overflow-safe `log(cosh(z))`; exact for small `z`, asymptotically
/// `|z| - log 2` for large `|z|`.
pub fn logcosh(z: f64) -> f64 {
    let az = z.abs();
    az - std::f64::consts::LN_2 + (-2.0 * az).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// Smooth adaptive observer
// ---------------------------------------------------------------------------

/// Integrator states of the smooth adaptive observer. The published
/// estimates come out of [`IandIObserver::outputs`], which adds the
/// output-dependent correction terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IandIState {
    pub x2_i: f64,
    pub theta1_i: f64,
    pub theta2_i: f64,
}

/// Velocity and friction-parameter estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IandIOutputs {
    pub x2_hat: f64,
    pub theta1_hat: f64,
    pub theta2_hat: f64,
}

/// Time derivative of [`IandIState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IandIDeriv {
    pub x2_i_dot: f64,
    pub theta1_i_dot: f64,
    pub theta2_i_dot: f64,
}

/// The smooth adaptive observer; `k1 > 0` is its only gain and sets both the
/// velocity-error decay rate and how hard the output correction leans on the
/// (possibly noisy) position measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IandIObserver {
    pub k1: f64,
}

impl IandIObserver {
    /// Estimates as algebraic functions of the integrator state and the
    /// measured position `x1`.
    pub fn outputs(&self, s: &IandIState, x1: f64, vartheta: f64) -> IandIOutputs {
        let x2_hat = s.x2_i + self.k1 * x1;
        IandIOutputs {
            x2_hat,
            theta1_hat: s.theta1_i - vartheta / (2.0 * self.k1) * x2_hat * x2_hat,
            theta2_hat: s.theta2_i - logcosh(vartheta * x2_hat) / self.k1,
        }
    }

    /// Integrator dynamics. The velocity integrator replays the plant model
    /// with the current estimates; the parameter integrators are driven by
    /// the same replay so that the combined (integrator + correction)
    /// estimates obey pure gradient-like adaptation.
    pub fn deriv(&self, s: &IandIState, x1: f64, u: f64, vartheta: f64) -> IandIDeriv {
        let out = self.outputs(s, x1, vartheta);
        let x2_i_dot = -(out.theta1_hat + self.k1) * out.x2_hat
            - out.theta2_hat * (vartheta * out.x2_hat).tanh()
            + u;
        let drive = x2_i_dot + self.k1 * out.x2_hat;
        IandIDeriv {
            x2_i_dot,
            theta1_i_dot: vartheta / self.k1 * out.x2_hat * drive,
            theta2_i_dot: vartheta / self.k1 * (vartheta * out.x2_hat).tanh() * drive,
        }
    }
}

// ---------------------------------------------------------------------------
// Sliding-mode observer
// ---------------------------------------------------------------------------

/// Integrated states of the sliding-mode observer: the state estimate, the
/// parameter-estimate offset from the nominal guess, and the 2x2 adaptation
/// covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmState {
    pub x1_hat: f64,
    pub x2_hat: f64,
    /// Parameter estimate relative to the nominal guess `theta_bar`.
    pub delta_theta: [f64; 2],
    pub gamma: [[f64; 2]; 2],
}

/// Time derivative of [`SmState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmDeriv {
    pub x1_hat_dot: f64,
    pub x2_hat_dot: f64,
    pub delta_theta_dot: [f64; 2],
    pub gamma_dot: [[f64; 2]; 2],
}

/// Super-twisting observer gains: `c1` scales the relay injection into the
/// velocity estimate, `c2` the square-root injection into the position
/// estimate, and `theta_bar` is the nominal parameter guess the adaptation
/// is anchored to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmObserver {
    pub c1: f64,
    pub c2: f64,
    pub theta_bar: [f64; 2],
}

/// Friction regressor `(-x2_hat, -tanh(vartheta * x2))`: the plant's
/// velocity dynamics are `x2' = phi^T theta + u` with this `phi`.
pub fn sm_regressor(x2_hat: f64, x2: f64, vartheta: f64) -> [f64; 2] {
    [-x2_hat, -(vartheta * x2).tanh()]
}

/// Both leading principal minors positive, i.e. the covariance is still
/// positive definite (symmetry is maintained separately by the run loop).
pub fn gamma_is_spd(g: &[[f64; 2]; 2]) -> bool {
    g[0][0] > 0.0 && g[0][0] * g[1][1] - g[0][1] * g[1][0] > 0.0
}

/// Average out the (tiny) asymmetry that finite-precision integration can
/// introduce into the covariance.
pub fn symmetrize(g: &mut [[f64; 2]; 2]) {
    let off = 0.5 * (g[0][1] + g[1][0]);
    g[0][1] = off;
    g[1][0] = off;
}

impl SmObserver {
    /// Published parameter estimate: nominal guess plus adapted offset.
    pub fn theta_hat(&self, s: &SmState) -> [f64; 2] {
        [
            s.delta_theta[0] + self.theta_bar[0],
            s.delta_theta[1] + self.theta_bar[1],
        ]
    }

    /// Observer dynamics given the measured position `x1_meas` and the
    /// velocity `x2_reg` used inside the regressor's friction term (the
    /// plant's true velocity in the baseline setup; the estimate under the
    /// self-contained ablation).
    ///
    /// Fails with [`SimError::CovarianceDegenerate`] if the covariance is no
    /// longer positive definite when the derivative is requested.
    #[allow(clippy::too_many_arguments)]
    pub fn deriv(
        &self,
        t: f64,
        s: &SmState,
        x1_meas: f64,
        x2_reg: f64,
        u: f64,
        vartheta: f64,
        sign_mode: SignMode,
    ) -> Result<SmDeriv, SimError> {
        if !gamma_is_spd(&s.gamma) {
            return Err(SimError::CovarianceDegenerate { t });
        }
        let x1_tilde = x1_meas - s.x1_hat;
        let sg = sgn(x1_tilde, sign_mode);
        let phi = sm_regressor(s.x2_hat, x2_reg, vartheta);
        let relay = self.c1 * sg;
        let g = &s.gamma;
        // Γ φ and Γᵀ φ (identical once Γ is symmetric, kept separate so the
        // derivative is honest even under transient asymmetry).
        let gphi = [
            g[0][0] * phi[0] + g[0][1] * phi[1],
            g[1][0] * phi[0] + g[1][1] * phi[1],
        ];
        let gtphi = [
            g[0][0] * phi[0] + g[1][0] * phi[1],
            g[0][1] * phi[0] + g[1][1] * phi[1],
        ];
        let innovation = -(phi[0] * s.delta_theta[0] + phi[1] * s.delta_theta[1]) + relay;
        Ok(SmDeriv {
            x1_hat_dot: s.x2_hat + self.c2 * x1_tilde.abs().sqrt() * sg,
            x2_hat_dot: u + phi[0] * self.theta_bar[0] + phi[1] * self.theta_bar[1] + relay,
            delta_theta_dot: [gphi[0] * innovation, gphi[1] * innovation],
            gamma_dot: [
                [-gphi[0] * gtphi[0], -gphi[0] * gtphi[1]],
                [-gphi[1] * gtphi[0], -gphi[1] * gtphi[1]],
            ],
        })
    }
}
