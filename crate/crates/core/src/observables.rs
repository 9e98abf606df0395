//! Reduced states, local Pauli expectations and l1-norm coherence.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::ZERO;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> DMatrix<Complex64> {
        let (o, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        match self {
            Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, o, o, ZERO]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, ZERO, ZERO, -o]),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "x",
            Pauli::Y => "y",
            Pauli::Z => "z",
        })
    }
}

/// `⟨σ^axis⟩(t)` for one atom on a trajectory's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub atom: usize,
    pub axis: Pauli,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Reduced state on the atoms in `keep` (0-based, any order; result keeps
/// ascending atom order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_atoms();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one atom".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= n) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} is not a set of atom indices below {n}"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let m = rho.matrix();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();

    // full index from (kept bits, traced bits); atom 0 is the most significant bit
    let compose = |a: usize, b: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &atom) in kept.iter().enumerate() {
            let bit = (a >> (kept.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - atom);
        }
        for (pos, &atom) in traced.iter().enumerate() {
            let bit = (b >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - atom);
        }
        idx
    };

    let mut out = DMatrix::from_element(dk, dk, ZERO);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// `Tr[ρ_atom σ^axis]` through the single-atom reduced state.
pub fn pauli_expectation(rho: &DensityMatrix, atom: usize, axis: Pauli) -> Result<f64> {
    let r = partial_trace(rho, &[atom])?;
    let m = r.matrix();
    Ok(match axis {
        Pauli::X => 2.0 * m[(0, 1)].re,
        // Tr[ρ σʸ] = i(ρ01 − ρ10) = −2 Im ρ01 for Hermitian ρ
        Pauli::Y => -2.0 * m[(0, 1)].im,
        Pauli::Z => (m[(0, 0)] - m[(1, 1)]).re,
    })
}

/// Sum of the moduli of all off-diagonal entries in the computational basis.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    l1_coherence_matrix(rho.matrix())
}

pub(crate) fn l1_coherence_matrix(m: &DMatrix<Complex64>) -> f64 {
    let mut total = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{site_operator, ONE};
    use crate::model::AtomSpec;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn atom(theta: f64, phi: f64) -> AtomSpec {
        AtomSpec::from_state_angles(1.0, theta, phi).unwrap()
    }

    #[test]
    fn product_state_factorises() {
        let a = atom(0.3, 1.1);
        let b = atom(2.0, 0.4);
        let rho = DensityMatrix::product(&[a, b]);
        let r1 = partial_trace(&rho, &[0]).unwrap();
        let single = DensityMatrix::product(&[a]);
        assert!(crate::linalg::max_abs(&(r1.matrix() - single.matrix())) < 1e-15);
        let r2 = partial_trace(&rho, &[1]).unwrap();
        let single = DensityMatrix::product(&[b]);
        assert!(crate::linalg::max_abs(&(r2.matrix() - single.matrix())) < 1e-15);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let psi = DVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        for keep in [0, 1] {
            let r = partial_trace(&rho, &[keep]).unwrap();
            let mixed = DensityMatrix::maximally_mixed(1);
            assert!(crate::linalg::max_abs(&(r.matrix() - mixed.matrix())) < 1e-15);
        }
    }

    fn random_pure(n: usize, seed: u64) -> DensityMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n;
        let mut psi = DVector::from_fn(dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        psi /= c(psi.norm(), 0.0);
        DensityMatrix::from_pure(&psi).unwrap()
    }

    #[test]
    fn two_of_three_against_explicit_summation() {
        let rho = random_pure(3, 7);
        let m = rho.matrix();
        // oracle: ρ_{12}[(a b),(a' b')] = Σ_c ρ[(a b c),(a' b' c)]
        let mut oracle = DMatrix::from_element(4, 4, ZERO);
        for a in 0..2 {
            for b in 0..2 {
                for ap in 0..2 {
                    for bp in 0..2 {
                        for cc in 0..2 {
                            oracle[(2 * a + b, 2 * ap + bp)] +=
                                m[(4 * a + 2 * b + cc, 4 * ap + 2 * bp + cc)];
                        }
                    }
                }
            }
        }
        let r = partial_trace(&rho, &[0, 1]).unwrap();
        assert!(crate::linalg::max_abs(&(r.matrix() - oracle)) < 1e-12);
    }

    #[test]
    fn partial_trace_composes() {
        let rho = random_pure(3, 11);
        let step = partial_trace(&partial_trace(&rho, &[0, 1]).unwrap(), &[0]).unwrap();
        let direct = partial_trace(&rho, &[0]).unwrap();
        assert!(crate::linalg::max_abs(&(step.matrix() - direct.matrix())) < 1e-12);
        assert!((direct.trace() - ONE).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let rho = random_pure(2, 1);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn pauli_examples() {
        let plus = DensityMatrix::product(&[atom(PI / 4.0, 0.0)]);
        assert!((pauli_expectation(&plus, 0, Pauli::X).unwrap() - 1.0).abs() < 1e-15);
        let tilted = DensityMatrix::product(&[atom(PI / 4.0, -PI / 3.0)]);
        // oracle: 2 Re(cos θ · e^{iφ} sin θ) = cos φ
        assert!((pauli_expectation(&tilted, 0, Pauli::X).unwrap() - 0.5).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        for axis in Pauli::ALL {
            for a in 0..2 {
                assert_eq!(pauli_expectation(&mixed, a, axis).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn pauli_matches_full_space_operator() {
        for seed in 0..5 {
            let rho = random_pure(3, seed);
            for a in 0..3 {
                for axis in Pauli::ALL {
                    let op = site_operator(&axis.matrix(), a, 3);
                    let full = (rho.matrix() * op).trace().re;
                    let local = pauli_expectation(&rho, a, axis).unwrap();
                    assert!((full - local).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coherence_examples() {
        let plus = DensityMatrix::product(&[atom(PI / 4.0, 0.0)]);
        assert!((l1_coherence(&plus) - 1.0).abs() < 1e-15);
        let diag = DensityMatrix::maximally_mixed(2);
        assert_eq!(l1_coherence(&diag), 0.0);
        let pp = DensityMatrix::product(&[atom(PI / 4.0, 0.0), atom(PI / 4.0, 0.0)]);
        assert!((l1_coherence(&pp) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn coherence_bounds_and_phase_invariance() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 3);
            let rho = random_pure(n, 100 + seed);
            let cl1 = l1_coherence(&rho);
            assert!(cl1 >= 0.0 && cl1 <= (1 << n) as f64 - 1.0 + 1e-12);
        }
        let s = 0.5f64.sqrt();
        let psi = DVector::from_vec(vec![c(s, 0.0), c(0.0, s)]);
        let phased = &psi * Complex64::from_polar(1.0, 0.77);
        let a = l1_coherence(&DensityMatrix::from_pure(&psi).unwrap());
        let b = l1_coherence(&DensityMatrix::from_pure(&phased).unwrap());
        assert!((a - b).abs() < 1e-14);
    }
}
