use super::*;
use crate::model::{BathSpec, CouplingSource, SelfEnergy};
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn pair_model(omegas: [f64; 2], a12: f64, f12: f64, nbar: f64) -> ModelSpec {
    let atoms = omegas
        .iter()
        .map(|&w| AtomSpec::from_state_angles(w, PI / 4.0, 0.0).unwrap())
        .collect();
    let a = DMatrix::from_row_slice(2, 2, &[1.0, a12, a12, 1.0]);
    let f = DMatrix::from_row_slice(2, 2, &[0.0, f12, f12, 0.0]);
    ModelSpec::new(
        atoms,
        BathSpec::new(nbar).unwrap(),
        CouplingSource::Matrices { a, f },
        0.05,
    )
    .unwrap()
}

fn single_model(theta: f64, nbar: f64) -> ModelSpec {
    ModelSpec::new(
        vec![AtomSpec::from_state_angles(1.0, theta, 0.0).unwrap()],
        BathSpec::new(nbar).unwrap(),
        CouplingSource::Matrices {
            a: DMatrix::from_element(1, 1, 1.0),
            f: DMatrix::zeros(1, 1),
        },
        0.05,
    )
    .unwrap()
}

fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    linalg::max_abs(&(a - b)) <= tol
}

#[test]
fn hamiltonian_single_atom() {
    let m = single_model(0.0, 0.0).with_self_energy(SelfEnergy::FullSigmaZ);
    let h = build_hamiltonian(&m);
    let expect = CMatrix::from_row_slice(2, 2, &[c(1.0), ZERO, ZERO, c(-1.0)]);
    assert!(close(&h, &expect, 0.0));

    let half = build_hamiltonian(&single_model(0.0, 0.0));
    assert!(close(&half, &(expect * c(0.5)), 0.0));
}

#[test]
fn hamiltonian_two_atoms_without_exchange() {
    let m = pair_model([1.0, 1.0], 0.0, 0.0, 0.0).with_self_energy(SelfEnergy::FullSigmaZ);
    let h = build_hamiltonian(&m);
    let expect = CMatrix::from_diagonal(&linalg::CVector::from_vec(vec![
        c(2.0),
        ZERO,
        ZERO,
        c(-2.0),
    ]));
    assert!(close(&h, &expect, 0.0));
}

#[test]
fn hamiltonian_exchange_couples_single_excitations() {
    let m = pair_model([1.0, 1.0], 0.0, 0.05, 0.0);
    let h = build_hamiltonian(&m);
    // |01⟩ ↔ |10⟩ are indices 1 and 2
    assert_eq!(h[(1, 2)], c(0.05));
    assert_eq!(h[(2, 1)], c(0.05));
    assert!(close(&h, &h.adjoint(), 0.0));
    let off: f64 = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]
        .iter()
        .map(|&(i, j)| h[(i, j)].norm())
        .sum();
    assert_eq!(off, 0.0);
}

#[test]
fn liouvillian_shape_and_trace_preservation() {
    let l = build_liouvillian(&single_model(PI / 4.0, 0.3));
    assert_eq!(l.matrix().nrows(), 4);
    assert!(l.trace_leak() < 1e-14);
    for n in 2..=3 {
        let atoms: Vec<AtomSpec> = (0..n)
            .map(|k| AtomSpec::from_state_angles(1.0 + 0.05 * k as f64, 0.3, 0.2).unwrap())
            .collect();
        let mut a = DMatrix::from_element(n, n, 0.4);
        let mut f = DMatrix::from_element(n, n, 0.03);
        for i in 0..n {
            a[(i, i)] = 1.0;
            f[(i, i)] = 0.0;
        }
        let m = ModelSpec::new(atoms, BathSpec::new(0.7).unwrap(), CouplingSource::Matrices { a, f }, 0.05)
            .unwrap();
        let l = build_liouvillian(&m);
        assert_eq!(l.matrix().nrows(), 1 << (2 * n));
        assert!(l.trace_leak() < 1e-13);
    }
}

#[test]
fn liouvillian_maps_hermitian_to_hermitian() {
    let l = build_liouvillian(&pair_model([1.0, 1.08], 0.6, 0.02, 0.4));
    let rho = DensityMatrix::product(&[
        AtomSpec::from_state_angles(1.0, 0.4, 1.0).unwrap(),
        AtomSpec::from_state_angles(1.0, 1.1, 2.5).unwrap(),
    ]);
    let out = l.apply(rho.matrix());
    assert!(close(&out, &out.adjoint(), 1e-14));
}

#[test]
fn single_atom_excited_population_decays_at_the_spontaneous_rate() {
    // γ = ω³ g = 0.05; ρ_00(t) = e^{−γt} from the excited state
    let m = single_model(0.0, 0.0);
    let l = build_liouvillian(&m);
    let rho0 = DensityMatrix::product(m.atoms());
    let times = time_grid(40.0, 0.5).unwrap();
    let tol = 1e-9;
    let traj = propagate_adaptive(&l, &rho0, &times, AdaptiveOptions::with_tolerance(tol)).unwrap();
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let exact = (-0.05 * t).exp();
        assert!((s.matrix()[(0, 0)].re - exact).abs() < 10.0 * tol, "t = {t}");
    }
    let spec = propagate_spectral(&l, &rho0, &times).unwrap();
    for (t, s) in spec.times().iter().zip(spec.states()) {
        assert!((s.matrix()[(0, 0)].re - (-0.05 * t).exp()).abs() < 1e-12);
    }
}

#[test]
fn single_atom_coherence_oscillates_and_decays() {
    // ρ_01(t) = ρ_01(0) e^{−iωt − γt/2} with ω the level splitting
    let m = single_model(PI / 4.0, 0.0);
    let l = build_liouvillian(&m);
    let rho0 = DensityMatrix::product(m.atoms());
    let times = time_grid(30.0, 0.25).unwrap();
    let traj = propagate_spectral(&l, &rho0, &times).unwrap();
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let exact = Complex64::from_polar(0.5 * (-0.025 * t).exp(), -t);
        assert!((s.matrix()[(0, 1)] - exact).norm() < 1e-11, "t = {t}");
    }
}

#[test]
fn singlet_is_dark_for_identical_fully_collective_atoms() {
    let l = build_liouvillian(&pair_model([1.0, 1.0], 1.0, 0.0, 0.0));
    let s = 0.5f64.sqrt();
    let psi = DVector::from_vec(vec![ZERO, c(s), c(-s), ZERO]);
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    assert!(linalg::max_abs(&l.apply(rho.matrix())) < 1e-12);
}

#[test]
fn spectrum_has_stationary_modes_and_no_growth() {
    let collective = build_liouvillian(&pair_model([1.0, 1.0], 1.0, 0.0, 0.0));
    let spec = lindblad_spectrum(&collective).unwrap();
    let zeros = spec.iter().filter(|z| z.norm() < 1e-9).count();
    assert!(zeros >= 2, "found {zeros} stationary modes");
    assert!(spec.iter().all(|z| z.re <= 1e-10));

    let single = build_liouvillian(&single_model(0.0, 0.5));
    let spec = lindblad_spectrum(&single).unwrap();
    assert_eq!(spec.iter().filter(|z| z.norm() < 1e-9).count(), 1);
    assert!(spec.iter().all(|z| z.re <= 1e-10));

    let generic = build_liouvillian(&pair_model([1.0, 1.08], 0.5, 0.02, 0.3));
    let spec = lindblad_spectrum(&generic).unwrap();
    assert!(spec.iter().all(|z| z.re <= 1e-10));
    assert!(spec[0].norm() < 1e-9);
}

#[test]
fn zero_generator_gives_constant_trajectory() {
    let l = Liouvillian::from_matrix(2, CMatrix::zeros(16, 16)).unwrap();
    let rho0 = DensityMatrix::product(&[
        AtomSpec::from_state_angles(1.0, 0.3, 0.1).unwrap(),
        AtomSpec::from_state_angles(1.0, 1.3, 2.0).unwrap(),
    ]);
    let times = time_grid(10.0, 1.0).unwrap();
    let a = propagate_adaptive(&l, &rho0, &times, AdaptiveOptions::default()).unwrap();
    let s = propagate_spectral(&l, &rho0, &times).unwrap();
    for traj in [a, s] {
        for state in traj.states() {
            assert!(close(state.matrix(), rho0.matrix(), 1e-15));
        }
    }
}

#[test]
fn spectral_propagator_is_identity_at_zero() {
    let l = build_liouvillian(&pair_model([1.0, 1.08], 0.7, 0.03, 0.2));
    let p = SpectralPropagator::new(&l);
    let id = CMatrix::identity(16, 16);
    assert!(close(&p.matrix_at(0.0), &id, 1e-10));
}

#[test]
fn propagators_agree() {
    for (omega2, a12, f12, nbar) in [
        (1.0, 1.0, 0.0, 0.0),
        (1.08, 0.0, 0.0, 0.0),
        (1.08, 0.9, 0.05, 0.0),
        (1.0, 0.2, 0.0, 1.0),
    ] {
        let m = pair_model([1.0, omega2], a12, f12, nbar);
        let l = build_liouvillian(&m);
        let rho0 = DensityMatrix::product(m.atoms());
        let times = time_grid(100.0, 0.5).unwrap();
        let a = propagate_adaptive(&l, &rho0, &times, AdaptiveOptions::default()).unwrap();
        let s = propagate_spectral(&l, &rho0, &times).unwrap();
        assert_eq!(a.route(), PropagationRoute::Adaptive);
        for (x, y) in a.states().iter().zip(s.states()) {
            assert!(close(x.matrix(), y.matrix(), 1e-6));
        }
    }
}

#[test]
fn expm_fallback_matches_eigenbasis() {
    // the fully collective pair has a degenerate spectrum; compare both routes directly
    let m = pair_model([1.0, 1.0], 1.0, 0.0, 0.0);
    let l = build_liouvillian(&m);
    let p = SpectralPropagator::new(&l);
    let reference = linalg::expm(&(l.matrix() * c(7.5)));
    assert!(close(&p.matrix_at(7.5), &reference, 1e-9));
}

#[test]
fn thermal_steady_state_populations() {
    for nbar in [0.0f64, 0.5, 1.0] {
        let l = build_liouvillian(&single_model(PI / 4.0, nbar));
        let ss = steady_state(&l).unwrap();
        let excited = ss.matrix()[(0, 0)].re;
        assert!((excited - nbar / (2.0 * nbar + 1.0)).abs() < 1e-12, "nbar = {nbar}");
        assert!(ss.matrix()[(0, 1)].norm() < 1e-12);
    }
}

#[test]
fn degenerate_null_space_is_reported() {
    let l = build_liouvillian(&pair_model([1.0, 1.0], 1.0, 0.0, 0.0));
    assert!(matches!(steady_state(&l), Err(Error::InvalidModel(_))));
}

#[test]
fn relabelling_atoms_permutes_the_generator() {
    let m = pair_model([1.0, 1.08], 0.6, 0.02, 0.3);
    let swapped = pair_model([1.08, 1.0], 0.6, 0.02, 0.3);
    // swap operator on two qubits: |ab⟩ → |ba⟩
    let mut p = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        p[(i, j)] = ONE;
    }
    let h = build_hamiltonian(&m);
    let hs = build_hamiltonian(&swapped);
    assert!(close(&(&p * &h * &p), &hs, 1e-15));

    let super_p = kron(&p, &p);
    let l = build_liouvillian(&m);
    let ls = build_liouvillian(&swapped);
    assert!(close(&(&super_p * l.matrix() * &super_p), ls.matrix(), 1e-15));
}

#[test]
fn basis_flip_mirrors_the_dynamics() {
    let m = pair_model([1.0, 1.08], 0.6, 0.02, 0.0);
    let flipped = m.clone().with_basis(BasisConvention::OneExcited);
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let xx = kron(&x, &x);
    let h = build_hamiltonian(&m);
    let hf = build_hamiltonian(&flipped);
    assert!(close(&(&xx * &h * &xx), &hf, 1e-15));
}

#[test]
fn density_matrix_validation() {
    assert!(DensityMatrix::new(CMatrix::identity(3, 3)).is_err());
    assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
    let bad = CMatrix::from_row_slice(2, 2, &[c(1.5), ZERO, ZERO, c(-0.5)]);
    assert!(DensityMatrix::new(bad).is_err());
    let ok = DensityMatrix::maximally_mixed(2);
    assert!((ok.purity() - 0.25).abs() < 1e-15);
    assert!(DensityMatrix::new(ok.into_matrix()).is_ok());
}

#[test]
fn time_grid_appends_final_time() {
    let g = time_grid(400.0, 0.15).unwrap();
    assert_eq!(g.len(), 2668);
    assert_eq!(*g.last().unwrap(), 400.0);
    let g = time_grid(3.0, 0.5).unwrap();
    assert_eq!(g.len(), 7);
    assert!(time_grid(1.0, 0.0).is_err());
    assert!(validate_times(&[0.0, 1.0, 1.0]).is_err());
}
