//! Closed-form propagation `vec ρ(t) = V e^{Λt} V⁻¹ vec ρ(0)`.

use num_complex::Complex64;

use super::{check_snapshot, validate_times, DensityMatrix, Liouvillian, PropagationRoute, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{self, diagonalize, expm, CMatrix, CVector, EigenDecomposition};

/// Relative accuracy the eigenbasis must reproduce `𝓛` with before it is trusted.
const DIAGONALIZATION_TOL: f64 = 1e-10;

enum Route {
    Eigen(EigenDecomposition),
    Expm,
}

/// A Liouvillian prepared for evaluation at arbitrary times.
pub struct SpectralPropagator {
    generator: CMatrix,
    dim: usize,
    route: Route,
}

impl SpectralPropagator {
    pub fn new(l: &Liouvillian) -> Self {
        let route = match diagonalize(l.matrix(), DIAGONALIZATION_TOL) {
            Some(eig) => Route::Eigen(eig),
            None => Route::Expm,
        };
        Self {
            generator: l.matrix().clone(),
            dim: l.state_dim(),
            route,
        }
    }

    pub fn route(&self) -> PropagationRoute {
        match self.route {
            Route::Eigen(_) => PropagationRoute::Eigenbasis,
            Route::Expm => PropagationRoute::MatrixExponential,
        }
    }

    /// The propagator `e^{𝓛t}` as a matrix.
    pub fn matrix_at(&self, t: f64) -> CMatrix {
        match &self.route {
            Route::Eigen(eig) => {
                let mut scaled = eig.vectors.clone();
                for (k, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= (eig.values[k] * t).exp();
                }
                scaled * &eig.inverse
            }
            Route::Expm => expm(&(&self.generator * Complex64::new(t, 0.0))),
        }
    }

    /// `ρ(t)` from `ρ(0)`, unvalidated.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> CMatrix {
        let v = self.matrix_at(t) * rho0.to_vector();
        linalg::unvectorize(&v, self.dim)
    }

    fn trajectory(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        let v0 = rho0.to_vector();
        let mut out = Vec::with_capacity(times.len());
        match &self.route {
            Route::Eigen(eig) => {
                let coeffs = &eig.inverse * &v0;
                for &t in times {
                    let weighted = CVector::from_iterator(
                        coeffs.len(),
                        coeffs.iter().zip(eig.values.iter()).map(|(c, l)| c * (l * t).exp()),
                    );
                    let v = &eig.vectors * weighted;
                    out.push(self.snapshot(&v, t)?);
                }
            }
            Route::Expm => {
                let mut v = v0;
                let mut t_prev = 0.0;
                let mut step: Option<(f64, CMatrix)> = None;
                for &t in times {
                    let dt = t - t_prev;
                    if dt > 0.0 {
                        let reuse = matches!(&step, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
                        if !reuse {
                            step = Some((dt, expm(&(&self.generator * Complex64::new(dt, 0.0)))));
                        }
                        v = &step.as_ref().unwrap().1 * v;
                    }
                    t_prev = t;
                    out.push(self.snapshot(&v, t)?);
                }
            }
        }
        Ok(out)
    }

    fn snapshot(&self, v: &CVector, t: f64) -> Result<DensityMatrix> {
        if v.iter().any(|z| !z.is_finite()) {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: "non-finite propagated state".into(),
            });
        }
        let state = DensityMatrix::from_matrix_unchecked(linalg::unvectorize(v, self.dim))?;
        check_snapshot(&state, t)?;
        Ok(state)
    }
}

/// Exact propagation through the eigendecomposition of `𝓛`; falls back to
/// dense matrix exponentials when the eigenbasis is ill-conditioned (the
/// route taken is reported on the trajectory).
pub fn propagate_spectral(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    validate_times(times)?;
    if rho0.n_atoms() != l.n_atoms() {
        return Err(Error::InvalidArgument(format!(
            "state has {} atoms but the generator acts on {}",
            rho0.n_atoms(),
            l.n_atoms()
        )));
    }
    let prop = SpectralPropagator::new(l);
    let states = prop.trajectory(rho0, times)?;
    Ok(Trajectory::new(times.to_vec(), states, prop.route()))
}
