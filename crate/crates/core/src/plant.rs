//! The simulated plant: a unit-mass servo with viscous plus saturated
//! (Coulomb-like) friction,
//!
//! ```text
//!   x1' = x2
//!   x2' = -theta1 x2 - theta2 tanh(vartheta x2) + u
//! ```
//!
//! `tanh(vartheta x2)` stands in for `sign(x2)` with a steepness knob, which
//! keeps the model smooth while still looking like dry friction at the
//! default `vartheta = 100`.

use crate::error::ConfigError;

/// True plant parameters. `theta1`/`theta2` are the viscous and Coulomb
/// friction levels; `vartheta` is the slope of the friction approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantParams {
    pub theta1: f64,
    pub theta2: f64,
    pub vartheta: f64,
}

impl Default for PlantParams {
    /// Benchmark values used throughout the acceptance runs.
    fn default() -> Self {
        PlantParams {
            theta1: 0.4,
            theta2: 1.0,
            vartheta: 100.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("plant.theta1", self.theta1),
            ("plant.theta2", self.theta2),
            ("plant.vartheta", self.vartheta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::field(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Position and velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantState {
    pub x1: f64,
    pub x2: f64,
}

/// Time derivative of [`PlantState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantDeriv {
    pub x1_dot: f64,
    pub x2_dot: f64,
}

/// Total friction force at velocity `x2`: `theta1 x2 + theta2 tanh(vartheta x2)`.
pub fn friction_force(x2: f64, p: &PlantParams) -> f64 {
    p.theta1 * x2 + p.theta2 * (p.vartheta * x2).tanh()
}

/// Open-loop plant dynamics under control input `u`.
pub fn plant_deriv(s: &PlantState, u: f64, p: &PlantParams) -> PlantDeriv {
    PlantDeriv {
        x1_dot: s.x2,
        x2_dot: -friction_force(s.x2, p) + u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{integrate_step, IntegratorConfig, Method, SignMode, StateVector};

    #[test]
    fn friction_examples() {
        let p = PlantParams::default();
        assert_eq!(friction_force(0.0, &p), 0.0);
        // tanh(50) rounds to exactly 1.0 in f64, so this is 0.2 + 1.0.
        assert_eq!(friction_force(0.5, &p), 1.2);
    }

    #[test]
    fn friction_is_odd_and_increasing() {
        let p = PlantParams::default();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.05).collect();
        for &v in &grid {
            assert_eq!(friction_force(-v, &p), -friction_force(v, &p));
        }
        for w in grid.windows(2) {
            assert!(friction_force(w[1], &p) > friction_force(w[0], &p));
        }
    }

    #[test]
    fn deriv_examples() {
        let p = PlantParams::default();
        let d = plant_deriv(&PlantState { x1: 0.0, x2: 0.5 }, 0.0, &p);
        assert_eq!(d.x1_dot, 0.5);
        assert_eq!(d.x2_dot, -1.2);
        // An input that exactly cancels friction leaves velocity flat.
        let s = PlantState { x1: 1.0, x2: 0.3 };
        let d = plant_deriv(&s, friction_force(0.3, &p), &p);
        assert_eq!(d.x2_dot, 0.0);
    }

    #[test]
    fn unforced_speed_never_grows() {
        // Friction only dissipates: |x2| must be non-increasing step to step
        // (up to integration error) when u = 0.
        let p = PlantParams::default();
        static NAMES: &[&str] = &["x1", "x2"];
        let cfg = IntegratorConfig {
            method: Method::Rk4,
            step_h: 1e-4,
            t_end: 2.0,
            sign_mode: SignMode::Exact,
        };
        for x2_0 in [0.5, -0.3] {
            let mut x = StateVector::new(NAMES, &[0.0, x2_0]);
            for k in 0..cfg.n_steps() {
                let field = |_t: f64, s: &StateVector| {
                    let d = plant_deriv(&PlantState { x1: s[0], x2: s[1] }, 0.0, &p);
                    StateVector::new(NAMES, &[d.x1_dot, d.x2_dot])
                };
                let next = integrate_step(field, &x, k as f64 * cfg.step_h, &cfg).unwrap();
                assert!(next[1].abs() <= x[1].abs() + 1e-9);
                x = next;
            }
        }
    }

    #[test]
    fn params_validate() {
        assert!(PlantParams::default().validate().is_ok());
        let bad = PlantParams {
            vartheta: 0.0,
            ..PlantParams::default()
        };
        match bad.validate().unwrap_err() {
            ConfigError::Field { field, .. } => assert_eq!(field, "plant.vartheta"),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
