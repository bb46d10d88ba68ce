//! Fixed-step ODE integration over small named state vectors.
//!
//! Everything here is deliberately boring: explicit Euler and classic RK4 on
//! a uniform grid, no adaptivity, no event detection. Discontinuous
//! right-hand sides (relay terms) are evaluated like any other stage value;
//! that choice is part of the benchmark contract, chattering and all.

use smallvec::SmallVec;

use crate::error::{ConfigError, SimError};

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
}

/// How relay (`sgn`) terms are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignMode {
    /// True sign function with `sgn(0) = 0`.
    Exact,
    /// Saturated linear approximation `clamp(z / eps, -1, 1)`.
    BoundaryLayer { eps: f64 },
}

/// Relay evaluation used by the sliding-mode injection terms.
pub fn sgn(z: f64, mode: SignMode) -> f64 {
    match mode {
        SignMode::Exact => {
            if z > 0.0 {
                1.0
            } else if z < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        SignMode::BoundaryLayer { eps } => (z / eps).clamp(-1.0, 1.0),
    }
}

/// Uniform-grid integration settings. The grid is `t_k = k * step_h` for
/// `k = 0 ..= n_steps()`; a `t_end` that is not an exact multiple of the step
/// is truncated, never rounded up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step_h: f64,
    pub t_end: f64,
    pub sign_mode: SignMode,
}

impl IntegratorConfig {
    /// Number of steps taken; the grid has `n_steps() + 1` points.
    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.step_h).floor() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step_h.is_finite() && self.step_h > 0.0) {
            return Err(ConfigError::field("integrator.step", "must be finite and > 0"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.step_h) {
            return Err(ConfigError::field(
                "integrator.t_end",
                "must be finite and at least one step long",
            ));
        }
        if let SignMode::BoundaryLayer { eps } = self.sign_mode {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(ConfigError::field(
                    "integrator.boundary_layer_eps",
                    "must be finite and > 0",
                ));
            }
        }
        Ok(())
    }
}

/// A flat state vector with a static name per component, so numerical
/// failures can say *which* quantity went bad.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    names: &'static [&'static str],
    values: SmallVec<[f64; 12]>,
}

impl StateVector {
    pub fn new(names: &'static [&'static str], values: &[f64]) -> Self {
        assert_eq!(
            names.len(),
            values.len(),
            "state schema has {} names but {} values were given",
            names.len(),
            values.len()
        );
        StateVector {
            names,
            values: SmallVec::from_slice(values),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.names
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Error out on the first non-finite component, naming it.
    pub fn check_finite(&self, t: f64) -> Result<(), SimError> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimError::NumericalBlowup {
                    t,
                    component: self.names[i],
                });
            }
        }
        Ok(())
    }

    /// `self + c * k`, componentwise.
    fn saxpy(&self, c: f64, k: &StateVector) -> StateVector {
        debug_assert_eq!(self.len(), k.len());
        let mut out = self.clone();
        for (o, kv) in out.values.iter_mut().zip(k.values.iter()) {
            *o += c * kv;
        }
        out
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Advance one step of `cfg.method` from `(t, x)` along `field`.
///
/// The field is evaluated exactly once per stage (1 for Euler, 4 for RK4);
/// every stage output and the resulting state are checked for finiteness.
/// Purely deterministic: identical inputs give bit-identical outputs.
pub fn integrate_step<F>(
    field: F,
    x: &StateVector,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<StateVector, SimError>
where
    F: Fn(f64, &StateVector) -> StateVector,
{
    let h = cfg.step_h;
    let next = match cfg.method {
        Method::Euler => {
            let k1 = field(t, x);
            k1.check_finite(t)?;
            x.saxpy(h, &k1)
        }
        Method::Rk4 => {
            let k1 = field(t, x);
            k1.check_finite(t)?;
            let k2 = field(t + 0.5 * h, &x.saxpy(0.5 * h, &k1));
            k2.check_finite(t + 0.5 * h)?;
            let k3 = field(t + 0.5 * h, &x.saxpy(0.5 * h, &k2));
            k3.check_finite(t + 0.5 * h)?;
            let k4 = field(t + h, &x.saxpy(h, &k3));
            k4.check_finite(t + h)?;
            // x + h/6 (k1 + 2 k2 + 2 k3 + k4)
            let mut out = x.clone();
            let w = h / 6.0;
            for i in 0..out.len() {
                out[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            out
        }
    };
    next.check_finite(t + h)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    static SCALAR: &[&str] = &["x"];

    fn decay(_t: f64, x: &StateVector) -> StateVector {
        StateVector::new(SCALAR, &[-x[0]])
    }

    fn cfg(method: Method, h: f64) -> IntegratorConfig {
        IntegratorConfig {
            method,
            step_h: h,
            t_end: 1.0,
            sign_mode: SignMode::Exact,
        }
    }

    #[test]
    fn euler_step_on_linear_decay() {
        let x = StateVector::new(SCALAR, &[1.0]);
        let next = integrate_step(decay, &x, 0.0, &cfg(Method::Euler, 0.1)).unwrap();
        assert_eq!(next[0], 0.9);
    }

    #[test]
    fn rk4_step_on_linear_decay() {
        let x = StateVector::new(SCALAR, &[1.0]);
        let next = integrate_step(decay, &x, 0.0, &cfg(Method::Rk4, 0.1)).unwrap();
        // Truncated Taylor series of e^{-0.1} through h^4.
        assert_eq!(next[0], 0.9048375);
        assert!((next[0] - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_field_is_identity() {
        let x = StateVector::new(SCALAR, &[3.25]);
        let zero = |_t: f64, _x: &StateVector| StateVector::new(SCALAR, &[0.0]);
        for method in [Method::Euler, Method::Rk4] {
            let next = integrate_step(zero, &x, 2.0, &cfg(method, 0.5)).unwrap();
            assert_eq!(next[0], 3.25);
        }
    }

    #[test]
    fn rk4_has_fourth_order_global_error() {
        // Integrate x' = -x over [0, 1] at two step sizes; halving the step
        // must shrink the global error by at least 2^4 (within slack).
        let err = |h: f64| {
            let c = cfg(Method::Rk4, h);
            let mut x = StateVector::new(SCALAR, &[1.0]);
            let n = (1.0 / h).round() as u64;
            for k in 0..n {
                x = integrate_step(decay, &x, k as f64 * h, &c).unwrap();
            }
            (x[0] - (-1.0f64).exp()).abs()
        };
        let e_coarse = err(0.02);
        let e_fine = err(0.01);
        // Frozen from an independent high-precision computation:
        //   e(0.02) = 4.987513735343896e-10, e(0.01) = 3.091304989766286e-11.
        assert!((e_coarse - 4.987513735343896e-10).abs() < 1e-14);
        assert!((e_fine - 3.091304989766286e-11).abs() < 1e-15);
        assert!(e_coarse / e_fine >= 15.8, "order ratio {}", e_coarse / e_fine);
    }

    #[test]
    fn blowup_names_the_component() {
        static PAIR: &[&str] = &["a", "b"];
        let x = StateVector::new(PAIR, &[0.0, 0.0]);
        let bad = |_t: f64, _x: &StateVector| StateVector::new(PAIR, &[0.0, f64::NAN]);
        let err = integrate_step(bad, &x, 1.5, &cfg(Method::Euler, 0.1)).unwrap_err();
        assert_eq!(
            err,
            SimError::NumericalBlowup {
                t: 1.5,
                component: "b"
            }
        );
    }

    #[test]
    fn steps_are_bit_identical_across_calls() {
        let x = StateVector::new(SCALAR, &[0.7853981]);
        let c = cfg(Method::Rk4, 1e-3);
        let a = integrate_step(decay, &x, 0.25, &c).unwrap();
        let b = integrate_step(decay, &x, 0.25, &c).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    #[test]
    fn sgn_exact_and_boundary_layer() {
        assert_eq!(sgn(0.3, SignMode::Exact), 1.0);
        assert_eq!(sgn(-1e-12, SignMode::Exact), -1.0);
        assert_eq!(sgn(0.0, SignMode::Exact), 0.0);
        let bl = SignMode::BoundaryLayer { eps: 0.01 };
        assert_eq!(sgn(0.005, bl), 0.5);
        assert_eq!(sgn(0.02, bl), 1.0);
        assert_eq!(sgn(-0.02, bl), -1.0);
        // Odd in both modes.
        for mode in [SignMode::Exact, bl] {
            for z in [-2.0, -0.02, -1e-9, 0.0, 1e-9, 0.004, 0.5, 3.0] {
                assert_eq!(sgn(-z, mode), -sgn(z, mode));
            }
        }
    }

    #[test]
    fn grid_length_truncates() {
        let c = IntegratorConfig {
            method: Method::Rk4,
            step_h: 1e-4,
            t_end: 150.0,
            sign_mode: SignMode::Exact,
        };
        assert_eq!(c.n_steps(), 1_500_000);
        let odd = IntegratorConfig { t_end: 0.25, step_h: 0.1, ..c };
        assert_eq!(odd.n_steps(), 2);
    }

    #[test]
    fn config_validation_names_fields() {
        let mut c = cfg(Method::Rk4, 0.0);
        match c.validate().unwrap_err() {
            ConfigError::Field { field, .. } => assert_eq!(field, "integrator.step"),
            other => panic!("unexpected error {other:?}"),
        }
        c.step_h = 0.1;
        c.sign_mode = SignMode::BoundaryLayer { eps: -1.0 };
        match c.validate().unwrap_err() {
            ConfigError::Field { field, .. } => {
                assert_eq!(field, "integrator.boundary_layer_eps")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
