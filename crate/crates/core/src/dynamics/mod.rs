//! Hamiltonian, Liouvillian and time propagation of the collective master equation.
//!
//! Density matrices are vectorised by stacking columns, so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

mod adaptive;
mod spectral;

pub use adaptive::{propagate_adaptive, AdaptiveOptions};
pub use spectral::{propagate_spectral, SpectralPropagator};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_min_eigenvalue, is_psd_within, kron, site_operator, CMatrix, ONE, ZERO,
};
use crate::model::{AtomSpec, BasisConvention, ModelSpec};
use crate::observables::{pauli_expectation, ObservableSeries, Pauli};

/// Tolerances a freshly constructed [`DensityMatrix`] must satisfy.
pub const STATE_HERMITICITY_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_POSITIVITY_TOL: f64 = 1e-8;

/// Looser tolerance applied to propagated snapshots; exceeding it is an integration failure.
pub const SNAPSHOT_TOL: f64 = 1e-6;

/// A Hermitian, unit-trace, positive semidefinite state of `N` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_atoms: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        state.check(STATE_HERMITICITY_TOL, STATE_TRACE_TOL, STATE_POSITIVITY_TOL)?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square with power-of-two dimension ≥ 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            n_atoms: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalised state vector.
    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "state vector must be normalised, |ψ| = {norm}"
            )));
        }
        Self::new(psi * psi.adjoint())
    }

    /// Product of the atoms' pure initial states.
    pub fn product(atoms: &[AtomSpec]) -> Self {
        let mut psi = DVector::from_element(1, ONE);
        for atom in atoms {
            let [c0, c1] = atom.state();
            psi = psi.kronecker(&DVector::from_vec(vec![c0, c1]));
        }
        Self {
            n_atoms: atoms.len(),
            matrix: &psi * psi.adjoint(),
        }
    }

    pub fn maximally_mixed(n_atoms: usize) -> Self {
        let dim = 1 << n_atoms;
        Self {
            n_atoms,
            matrix: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(&self.matrix)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ ρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Checks the state invariants against explicit tolerances.
    pub fn check(&self, herm_tol: f64, trace_tol: f64, positivity_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |ρ − ρ†| = {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        if !is_psd_within(&self.matrix, positivity_tol) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e} below −{positivity_tol:e}",
                self.min_eigenvalue()
            )));
        }
        Ok(())
    }

    pub(crate) fn to_vector(&self) -> linalg::CVector {
        linalg::vectorize(&self.matrix)
    }
}

/// The generator `𝓛` as a `4^N × 4^N` matrix on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    n_atoms: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    /// Wraps an arbitrary superoperator matrix; used for tests and custom generators.
    pub fn from_matrix(n_atoms: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << (2 * n_atoms);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "superoperator for {n_atoms} atoms must be {dim}x{dim}"
            )));
        }
        Ok(Self { n_atoms, matrix })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Hilbert-space dimension `2^N`.
    pub fn state_dim(&self) -> usize {
        1 << self.n_atoms
    }

    /// `𝓛(ρ)` as a matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let v = &self.matrix * linalg::vectorize(rho);
        linalg::unvectorize(&v, self.state_dim())
    }

    /// `max_k |Σ_i 𝓛_{(i,i),k}|`: zero when the generator preserves the trace.
    pub fn trace_leak(&self) -> f64 {
        let d = self.state_dim();
        (0..self.matrix.ncols())
            .map(|k| (0..d).map(|i| self.matrix[(i * d + i, k)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Which route produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationRoute {
    Adaptive,
    /// `V e^{Λt} V⁻¹`.
    Eigenbasis,
    /// Eigenbasis too ill-conditioned; stepped with dense matrix exponentials.
    MatrixExponential,
}

/// Density-matrix snapshots on a time grid. The initial state sits at `t = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    route: PropagationRoute,
}

impl Trajectory {
    pub(crate) fn new(times: Vec<f64>, states: Vec<DensityMatrix>, route: PropagationRoute) -> Self {
        debug_assert_eq!(times.len(), states.len());
        Self {
            times,
            states,
            route,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn route(&self) -> PropagationRoute {
        self.route
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.states.first().map_or(0, DensityMatrix::n_atoms)
    }

    /// `⟨σ^axis⟩` of one atom (0-based) at every snapshot.
    pub fn pauli_series(&self, atom: usize, axis: Pauli) -> Result<ObservableSeries> {
        let values = self
            .states
            .iter()
            .map(|s| pauli_expectation(s, atom, axis))
            .collect::<Result<Vec<_>>>()?;
        Ok(ObservableSeries {
            atom,
            axis,
            times: self.times.clone(),
            values,
        })
    }

    /// Snapshot whose time is nearest to `t`.
    pub fn state_near(&self, t: f64) -> Option<(f64, &DensityMatrix)> {
        let idx = self.times.iter().enumerate().min_by(|a, b| {
            (a.1 - t).abs().total_cmp(&(b.1 - t).abs())
        })?.0;
        Some((self.times[idx], &self.states[idx]))
    }
}

/// Uniform grid `0, step, 2·step, …` up to `final_time`, with `final_time`
/// appended when it is not (numerically) a grid point.
pub fn time_grid(final_time: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) || !(final_time.is_finite() && final_time >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time grid needs step > 0 and final time ≥ 0, got step {step}, final time {final_time}"
        )));
    }
    let eps = step * 1e-9;
    let count = ((final_time + eps) / step).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    let last = *times.last().unwrap();
    if final_time - last > eps {
        times.push(final_time);
    } else {
        *times.last_mut().unwrap() = final_time;
    }
    Ok(times)
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidArgument(
            "time grid must be finite and start at t ≥ 0".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_snapshot(state: &DensityMatrix, time: f64) -> Result<()> {
    state
        .check(SNAPSHOT_TOL, SNAPSHOT_TOL, SNAPSHOT_TOL)
        .map_err(|e| Error::IntegrationFailure {
            time,
            reason: e.to_string(),
        })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single-site σ⁻ in the chosen basis convention.
fn lowering(basis: BasisConvention) -> CMatrix {
    match basis {
        // |1⟩⟨0|
        BasisConvention::ZeroExcited => CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]),
        // |0⟩⟨1|
        BasisConvention::OneExcited => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]),
    }
}

/// σᶻ with +1 on the excited state.
fn energy_z(basis: BasisConvention) -> CMatrix {
    let sign = match basis {
        BasisConvention::ZeroExcited => 1.0,
        BasisConvention::OneExcited => -1.0,
    };
    CMatrix::from_row_slice(2, 2, &[c(sign), ZERO, ZERO, c(-sign)])
}

/// `H = s Σ ω_i σᶻ_i + Σ_{i≠j} f_ij σ⁺_i σ⁻_j` with `s` set by [`crate::SelfEnergy`].
pub fn build_hamiltonian(model: &ModelSpec) -> DMatrix<Complex64> {
    let n = model.n_atoms();
    let dim = model.dim();
    let basis = model.basis();
    let scale = model.self_energy().factor();
    let sz = energy_z(basis);
    let lowers: Vec<CMatrix> = (0..n).map(|i| site_operator(&lowering(basis), i, n)).collect();

    let mut h = CMatrix::zeros(dim, dim);
    for (i, atom) in model.atoms().iter().enumerate() {
        h += site_operator(&sz, i, n) * c(scale * atom.omega());
    }
    let f = model.couplings().f();
    for i in 0..n {
        for j in 0..n {
            if i != j && f[(i, j)] != 0.0 {
                h += lowers[i].adjoint() * &lowers[j] * c(f[(i, j)]);
            }
        }
    }
    h
}

/// Superoperator of `D(A, B) ρ = A ρ B − ½{B A, ρ}`.
fn dissipator_super(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let id = CMatrix::identity(d, d);
    let ba = b * a;
    kron(&b.transpose(), a) - (kron(&id, &ba) + kron(&ba.transpose(), &id)) * c(0.5)
}

/// Vectorised generator of the collective thermal master equation.
pub fn build_liouvillian(model: &ModelSpec) -> Liouvillian {
    let n = model.n_atoms();
    let dim = model.dim();
    let id = CMatrix::identity(dim, dim);
    let h = build_hamiltonian(model);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * minus_i;

    let nbar = model.bath().nbar();
    let gamma = model.couplings().gamma();
    let lowers: Vec<CMatrix> = (0..n)
        .map(|i| site_operator(&lowering(model.basis()), i, n))
        .collect();
    let raises: Vec<CMatrix> = lowers.iter().map(|m| m.adjoint()).collect();
    for i in 0..n {
        for j in 0..n {
            let rate = gamma[(i, j)];
            if rate == 0.0 {
                continue;
            }
            // emission: σ⁻_j ρ σ⁺_i − ½{σ⁺_i σ⁻_j, ρ}
            l += dissipator_super(&lowers[j], &raises[i]) * c(rate * (nbar + 1.0));
            if nbar > 0.0 {
                // absorption: σ⁺_j ρ σ⁻_i − ½{σ⁻_i σ⁺_j, ρ}
                l += dissipator_super(&raises[j], &lowers[i]) * c(rate * nbar);
            }
        }
    }
    Liouvillian {
        n_atoms: n,
        matrix: l,
    }
}

/// Eigenvalues of `𝓛` sorted by real part, largest (slowest decay) first.
pub fn lindblad_spectrum(l: &Liouvillian) -> Result<Vec<Complex64>> {
    let mut values = linalg::eigenvalues(&l.matrix).ok_or_else(|| {
        Error::InvalidArgument("Schur iteration did not converge on the Liouvillian".into())
    })?;
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(values)
}

/// The unique stationary state, from `𝓛 vec(ρ) = 0` with the trace row imposed.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.state_dim();
    let mut system = l.matrix.clone();
    let mut rhs = linalg::CVector::zeros(d * d);
    system.row_mut(0).fill(ZERO);
    for i in 0..d {
        system[(0, i * d + i)] = ONE;
    }
    rhs[0] = ONE;
    let sv = system.clone().singular_values();
    let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if smin <= 1e-12 * smax {
        return Err(Error::InvalidModel(
            "steady state is not unique (degenerate null space)".into(),
        ));
    }
    let lu = system.lu();
    let v = lu.solve(&rhs).ok_or_else(|| {
        Error::InvalidModel("steady state is not unique (singular generator)".into())
    })?;
    // a nearly singular system signals a degenerate null space
    let residual = (l.matrix() * &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > 1e-8 || v.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidModel(
            "steady state is not unique (degenerate null space)".into(),
        ));
    }
    let m = linalg::unvectorize(&v, d);
    let m = (&m + m.adjoint()) * c(0.5);
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests;
