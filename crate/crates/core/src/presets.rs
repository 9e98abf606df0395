//! Reference initial states and the two- and three-atom models used throughout
//! the acceptance runs and example configs.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::{AtomSpec, BathSpec, CouplingSource, ModelSpec, DEFAULT_G};

/// `(θ, φ)` of `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
pub type StateAngles = (f64, f64);

/// `(|0⟩ + |1⟩)/√2`.
pub const PSI_S1: StateAngles = (PI / 4.0, 0.0);
/// `(|0⟩ + e^{−iπ/3}|1⟩)/√2`.
pub const PSI_S2: StateAngles = (PI / 4.0, -PI / 3.0);
/// `cos(π/8)|0⟩ + sin(π/8)|1⟩`.
pub const PSI_S3: StateAngles = (PI / 8.0, 0.0);
/// `(|0⟩ + e^{−iπ/8}|1⟩)/√2`.
pub const PSI_S3_PRIME: StateAngles = (PI / 4.0, -PI / 8.0);

pub fn atom(omega: f64, state: StateAngles) -> Result<AtomSpec> {
    AtomSpec::from_state_angles(omega, state.0, state.1)
}

/// Symmetric matrix with unit (or zero) diagonal from its upper triangle.
pub fn symmetric(n: usize, diagonal: f64, upper: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::from_diagonal_element(n, n, diagonal);
    for &(i, j, v) in upper {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

/// Two atoms in `PSI_S1 ⊗ PSI_S2` with `ω₁ = 1`.
pub fn two_atom(omega2: f64, a12: f64, f12: f64, nbar: f64) -> Result<ModelSpec> {
    ModelSpec::new(
        vec![atom(1.0, PSI_S1)?, atom(omega2, PSI_S2)?],
        BathSpec::new(nbar)?,
        CouplingSource::Matrices {
            a: symmetric(2, 1.0, &[(0, 1, a12)]),
            f: symmetric(2, 0.0, &[(0, 1, f12)]),
        },
        DEFAULT_G,
    )
}

/// Identical, fully collective pair at zero temperature without exchange.
pub fn collective_pair() -> Result<ModelSpec> {
    two_atom(1.0, 1.0, 0.0, 0.0)
}

/// Three resonant atoms (`ω = 1`) in `PSI_S1 ⊗ PSI_S2 ⊗ third`, zero
/// temperature, no exchange.
pub fn three_atom(a12: f64, a13: f64, a23: f64, third: StateAngles) -> Result<ModelSpec> {
    ModelSpec::new(
        vec![atom(1.0, PSI_S1)?, atom(1.0, PSI_S2)?, atom(1.0, third)?],
        BathSpec::zero_temperature(),
        CouplingSource::Matrices {
            a: symmetric(3, 1.0, &[(0, 1, a12), (0, 2, a13), (1, 2, a23)]),
            f: DMatrix::zeros(3, 3),
        },
        DEFAULT_G,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_states_are_normalised_and_canonical() {
        for s in [PSI_S1, PSI_S2, PSI_S3, PSI_S3_PRIME] {
            let a = atom(1.0, s).unwrap();
            let [c0, c1] = a.state();
            assert!((c0.norm_sqr() + c1.norm_sqr() - 1.0).abs() < 1e-15);
            // same amplitudes as the literal angles
            assert!((c0.re - s.0.cos()).abs() < 1e-15);
            let lit = num_complex::Complex64::from_polar(s.0.sin(), s.1);
            assert!((c1 - lit).norm() < 1e-15);
        }
    }

    #[test]
    fn builders_validate() {
        assert!(two_atom(1.08, 1.0, 0.05, 0.0).is_ok());
        assert!(two_atom(1.0, 1.2, 0.0, 0.0).is_err());
        assert!(three_atom(0.8, 0.8, 0.4, PSI_S3).is_ok());
        // a₁₂ = a₁₃ = 1 forces a₂₃ = 1
        assert!(three_atom(1.0, 1.0, 0.4, PSI_S3).is_err());
    }
}
