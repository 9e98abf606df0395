//! Dormand–Prince 5(4) with step-size control on the vectorised master equation.

use num_complex::Complex64;

use super::{check_snapshot, validate_times, DensityMatrix, Liouvillian, PropagationRoute, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    /// Relative tolerance `tol` with an absolute floor three decades lower.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-3,
            ..Self::default()
        }
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: 1e-2,
            max_steps: 10_000_000,
        }
    }
}

// the generator is time independent, so the stage times c_i never appear
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

struct Stepper<'a> {
    l: &'a CMatrix,
    opts: AdaptiveOptions,
}

fn axpy(y: &CVector, terms: &[(f64, &CVector)], h: f64) -> CVector {
    let mut out = y.clone();
    for &(coef, k) in terms {
        if coef != 0.0 {
            out.axpy(Complex64::new(h * coef, 0.0), k, Complex64::new(1.0, 0.0));
        }
    }
    out
}

impl Stepper<'_> {
    fn rhs(&self, y: &CVector) -> CVector {
        self.l * y
    }

    /// One trial step. Returns `(y_next, k7, error_norm)`.
    fn attempt(&self, y: &CVector, k1: &CVector, h: f64) -> (CVector, CVector, f64) {
        let k2 = self.rhs(&axpy(y, &[(A21, k1)], h));
        let k3 = self.rhs(&axpy(y, &[(A31, k1), (A32, &k2)], h));
        let k4 = self.rhs(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
        let k5 = self.rhs(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = self.rhs(&axpy(
            y,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        ));
        let y_next = axpy(
            y,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            h,
        );
        let k7 = self.rhs(&y_next);

        let mut acc = 0.0;
        for i in 0..y.len() {
            let err = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.opts.atol + self.opts.rtol * y[i].norm().max(y_next[i].norm());
            acc += (err.norm() / scale).powi(2);
        }
        let err_norm = (acc / y.len() as f64).sqrt();
        (y_next, k7, err_norm)
    }
}

/// Integrates `d vec(ρ)/dt = 𝓛 vec(ρ)` from `ρ(0) = rho0`, landing exactly on
/// every requested time. Each snapshot is re-validated as a density matrix.
pub fn propagate_adaptive(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: AdaptiveOptions,
) -> Result<Trajectory> {
    validate_times(times)?;
    if rho0.n_atoms() != l.n_atoms() {
        return Err(Error::InvalidArgument(format!(
            "state has {} atoms but the generator acts on {}",
            rho0.n_atoms(),
            l.n_atoms()
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let dim = l.state_dim();
    let stepper = Stepper {
        l: l.matrix(),
        opts,
    };

    let mut y = rho0.to_vector();
    let mut k1 = stepper.rhs(&y);
    let mut t = 0.0;
    let mut h = opts.initial_step;
    let mut steps = 0usize;
    let mut states = Vec::with_capacity(times.len());

    for &target in times {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            if h_try <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegrationFailure {
                    time: t,
                    reason: format!("step size underflow (h = {h_try:e})"),
                });
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::IntegrationFailure {
                    time: t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let (y_next, k7, err) = stepper.attempt(&y, &k1, h_try);
            if !err.is_finite() {
                return Err(Error::IntegrationFailure {
                    time: t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                t = if clipped { target } else { t + h_try };
                y = y_next;
                k1 = k7;
                // a step shortened to hit the grid says little about the natural step
                h = if clipped { h.max(h_try * factor) } else { h_try * factor };
            } else {
                h = h_try * factor.min(1.0);
            }
        }
        let state = DensityMatrix::from_matrix_unchecked(linalg::unvectorize(&y, dim))?;
        check_snapshot(&state, target)?;
        states.push(state);
    }
    Ok(Trajectory::new(
        times.to_vec(),
        states,
        PropagationRoute::Adaptive,
    ))
}
