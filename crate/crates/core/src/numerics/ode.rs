//! Fixed-step classical Runge-Kutta integration of linear matrix equations
//! m'(t) = g(t) m(t).

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Integrate m' = g(t) m from 0 to `t_end` starting at `m0`, using classical
/// RK4 with uniform steps of size at most `step` (the interval is split into
/// ceil(t_end/step) equal pieces so the endpoint is hit exactly).
pub fn ode_solve_linear(
    g: impl Fn(f64) -> ComplexMatrix,
    m0: &ComplexMatrix,
    t_end: f64,
    step: f64,
) -> Result<ComplexMatrix> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidStep(format!("step must be positive and finite, got {step}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidStep(format!("duration must be nonnegative, got {t_end}")));
    }
    if t_end == 0.0 {
        return Ok(m0.clone());
    }
    let n_steps = (t_end / step).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;
    let half = Complex64::new(0.5 * dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut m = m0.clone();
    for k in 0..n_steps {
        let t = k as f64 * dt;
        let k1 = g(t).matmul(&m);
        let k2 = g(t + 0.5 * dt).matmul(&(&m + &k1.scale(half)));
        let k3 = g(t + 0.5 * dt).matmul(&(&m + &k2.scale(half)));
        let k4 = g(t + dt).matmul(&(&m + &k3.scale(Complex64::new(dt, 0.0))));
        let incr = &(&k1 + &k2.scale(two)) + &(&k3.scale(two) + &k4);
        m = &m + &incr.scale(sixth);
    }
    Ok(m)
}
