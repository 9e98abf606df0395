//! Physical specification of the atoms, their bath and their couplings.
//!
//! Couplings come either from explicit matrices (the mode used to scan the
//! collectivity and exchange parameters directly) or from atomic positions
//! and a shared dipole orientation.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of atoms.
pub const MAX_ATOMS: usize = 4;

/// Default dipole constant `g`.
pub const DEFAULT_G: f64 = 0.05;

/// Below this dimensionless distance `collectivity_a` switches to its Taylor series.
pub const SERIES_SWITCH_XI: f64 = 1e-3;

/// Below this dimensionless distance `exchange_f` refuses to evaluate.
pub const EXCHANGE_DIVERGENCE_XI: f64 = 1e-6;

/// Eigenvalue tolerance for the positive-semidefinite check on the rate matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;

const UNIT_NORM_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// One two-level atom: transition frequency and pure initial state
/// `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    omega: f64,
    theta: f64,
    phi: f64,
}

impl AtomSpec {
    /// Strict constructor: `omega > 0`, `theta ∈ [0, 2π]`, `phi ∈ [0, π]`.
    pub fn new(omega: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidModel(format!(
                "atom frequency must be positive, got {omega}"
            )));
        }
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::InvalidModel(format!(
                "theta must lie in [0, 2π], got {theta}"
            )));
        }
        if !(0.0..=PI).contains(&phi) {
            return Err(Error::InvalidModel(format!(
                "phi must lie in [0, π], got {phi}"
            )));
        }
        Ok(Self { omega, theta, phi })
    }

    /// Accepts any finite angles and maps them onto the canonical ranges
    /// without changing the state vector (not even by a global phase).
    ///
    /// `e^{iφ} = −e^{i(φ−π)}`, so a phase above π is folded back by flipping
    /// the sign of θ.
    pub fn from_state_angles(omega: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidModel("state angles must be finite".into()));
        }
        let mut theta = theta;
        let mut phi = phi.rem_euclid(TAU);
        if phi > PI {
            phi -= PI;
            theta = -theta;
        }
        let theta = theta.rem_euclid(TAU).min(TAU);
        Self::new(omega, theta, phi)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(omega, self.theta, self.phi)
    }

    pub fn with_angles(self, theta: f64, phi: f64) -> Result<Self> {
        Self::from_state_angles(self.omega, theta, phi)
    }

    /// Amplitudes `(⟨0|ψ⟩, ⟨1|ψ⟩)`.
    pub fn state(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.theta.cos(), 0.0),
            Complex64::from_polar(self.theta.sin(), self.phi),
        ]
    }
}

/// Atomic positions (units of `1/k0`) and a dipole orientation shared by all atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    positions: Vec<[f64; 3]>,
    dipole_direction: [f64; 3],
    k0: f64,
}

impl Geometry {
    pub fn new(positions: Vec<[f64; 3]>, dipole_direction: [f64; 3], k0: f64) -> Result<Self> {
        let norm = norm3(dipole_direction);
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "dipole direction must be a unit vector, |d| = {norm}"
            )));
        }
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::InvalidModel(format!("k0 must be positive, got {k0}")));
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if norm3(sub3(positions[i], positions[j])) == 0.0 {
                    return Err(Error::DegenerateGeometry(i + 1, j + 1));
                }
            }
        }
        Ok(Self {
            positions,
            dipole_direction,
            k0,
        })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn dipole_direction(&self) -> [f64; 3] {
        self.dipole_direction
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Dimensionless distance `ξ = k0 |r_i − r_j|` and the angle between the
/// separation vector and the dipole direction, for 0-based atom indices.
pub fn pair_geometry(geometry: &Geometry, i: usize, j: usize) -> Result<(f64, f64)> {
    let n = geometry.len();
    if i >= n || j >= n {
        return Err(Error::InvalidArgument(format!(
            "atom index out of range for {n} positions"
        )));
    }
    if i == j {
        return Err(Error::InvalidArgument(
            "pair geometry needs two distinct atoms".into(),
        ));
    }
    let r = sub3(geometry.positions[i], geometry.positions[j]);
    let dist = norm3(r);
    if dist == 0.0 {
        return Err(Error::DegenerateGeometry(i + 1, j + 1));
    }
    let cos_alpha = (dot3(r, geometry.dipole_direction) / dist).clamp(-1.0, 1.0);
    Ok((geometry.k0 * dist, cos_alpha.acos()))
}

/// Collectivity parameter `a(ξ, α)`; equals 1 at coincidence and decays as `1/ξ`.
pub fn collectivity_a(xi: f64, alpha: f64) -> f64 {
    if xi < SERIES_SWITCH_XI {
        collectivity_a_series(xi, alpha)
    } else {
        collectivity_a_direct(xi, alpha)
    }
}

pub(crate) fn collectivity_a_direct(xi: f64, alpha: f64) -> f64 {
    let c2 = alpha.cos().powi(2);
    let (s, c) = xi.sin_cos();
    1.5 * ((1.0 - 3.0 * c2) * (c / xi.powi(2) - s / xi.powi(3)) + (1.0 - c2) * s / xi)
}

// cos ξ/ξ² − sin ξ/ξ³ = Σ_{k≥1} (−1)^k 2k/(2k+1)! ξ^{2k−2}
// sin ξ/ξ            = Σ_{k≥0} (−1)^k 1/(2k+1)!  ξ^{2k}
pub(crate) fn collectivity_a_series(xi: f64, alpha: f64) -> f64 {
    let c2 = alpha.cos().powi(2);
    let x2 = xi * xi;
    let mut near = 0.0;
    let mut far = 0.0;
    // inv_fact = 1/(2k+1)!, pow = ξ^{2k}, prev_pow = ξ^{2k-2}
    let mut inv_fact = 1.0;
    let mut pow = 1.0;
    let mut prev_pow = 0.0;
    let mut sign = 1.0;
    for k in 0..8 {
        far += sign * inv_fact * pow;
        near += sign * 2.0 * k as f64 * inv_fact * prev_pow;
        let next = 2.0 * k as f64 + 2.0;
        inv_fact /= next * (next + 1.0);
        prev_pow = pow;
        pow *= x2;
        sign = -sign;
    }
    1.5 * ((1.0 - 3.0 * c2) * near + (1.0 - c2) * far)
}

/// Exchange (dipole-dipole) strength `f(ξ, α)` for a reference rate `gamma0`.
pub fn exchange_f(xi: f64, alpha: f64, gamma0: f64) -> Result<f64> {
    if !(xi >= EXCHANGE_DIVERGENCE_XI) {
        return Err(Error::NearFieldDivergence { xi });
    }
    let c2 = alpha.cos().powi(2);
    let (s, c) = xi.sin_cos();
    Ok(0.75
        * gamma0
        * ((1.0 - 3.0 * c2) * (s / xi.powi(2) + c / xi.powi(3)) - (1.0 - c2) * c / xi))
}

/// Collectivity, exchange and rate matrices for `N` atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    a: DMatrix<f64>,
    f: DMatrix<f64>,
    gamma: DMatrix<f64>,
}

impl CouplingMatrices {
    /// Validates `a` and `f` and derives `γ_ij = √(γ_i γ_j) a_ij` with `γ_i = ω_i³ g`.
    pub fn from_matrices(
        a: DMatrix<f64>,
        f: DMatrix<f64>,
        omegas: &[f64],
        g: f64,
    ) -> Result<Self> {
        let n = omegas.len();
        for (name, m) in [("a", &a), ("f", &f)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidModel(format!(
                    "coupling matrix {name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "coupling matrix {name} has non-finite entries"
                )));
            }
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidModel(format!("g must be non-negative, got {g}")));
        }
        let mut a_sym = DMatrix::zeros(n, n);
        let mut f_sym = DMatrix::zeros(n, n);
        for i in 0..n {
            if a[(i, i)] != 1.0 {
                return Err(Error::InvalidModel(format!(
                    "a[{0}][{0}] must be 1, got {1}",
                    i + 1,
                    a[(i, i)]
                )));
            }
            if f[(i, i)] != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "f[{0}][{0}] must be 0, got {1}",
                    i + 1,
                    f[(i, i)]
                )));
            }
            a_sym[(i, i)] = 1.0;
            for j in i + 1..n {
                for (name, m) in [("a", &a), ("f", &f)] {
                    if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                        return Err(Error::InvalidModel(format!(
                            "{name} must be symmetric: {name}[{0}][{1}] = {2} but {name}[{1}][{0}] = {3}",
                            i + 1,
                            j + 1,
                            m[(i, j)],
                            m[(j, i)]
                        )));
                    }
                }
                if a[(i, j)].abs() > 1.0 {
                    return Err(Error::InvalidModel(format!(
                        "|a[{}][{}]| = {} exceeds 1 (dynamics would not be positive)",
                        i + 1,
                        j + 1,
                        a[(i, j)].abs()
                    )));
                }
                a_sym[(i, j)] = a[(i, j)];
                a_sym[(j, i)] = a[(i, j)];
                f_sym[(i, j)] = f[(i, j)];
                f_sym[(j, i)] = f[(i, j)];
            }
        }

        let rates: Vec<f64> = omegas.iter().map(|w| w.powi(3) * g).collect();
        let mut gamma = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = (rates[i] * rates[j]).sqrt() * a_sym[(i, j)];
                gamma[(i, j)] = v;
                gamma[(j, i)] = v;
            }
        }
        let min_eig = SymmetricEigen::new(gamma.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if n > 0 && min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "rate matrix is not positive semidefinite (min eigenvalue {min_eig:e}); \
                 the collectivity parameters are not mutually consistent"
            )));
        }
        Ok(Self {
            a: a_sym,
            f: f_sym,
            gamma,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }
}

/// Coefficients from geometry. The reference frequency for `k0` and `γ0` is
/// the first atom's frequency.
pub fn build_couplings(geometry: &Geometry, atoms: &[AtomSpec], g: f64) -> Result<CouplingMatrices> {
    let n = atoms.len();
    if geometry.len() != n {
        return Err(Error::InvalidModel(format!(
            "geometry has {} positions for {n} atoms",
            geometry.len()
        )));
    }
    let gamma0 = atoms.first().map_or(0.0, |a| a.omega.powi(3) * g);
    let mut a = DMatrix::identity(n, n);
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let (xi, alpha) = pair_geometry(geometry, i, j)?;
            let aij = collectivity_a(xi, alpha);
            let fij = exchange_f(xi, alpha, gamma0)?;
            a[(i, j)] = aij;
            a[(j, i)] = aij;
            f[(i, j)] = fij;
            f[(j, i)] = fij;
        }
    }
    let omegas: Vec<f64> = atoms.iter().map(AtomSpec::omega).collect();
    CouplingMatrices::from_matrices(a, f, &omegas, g)
}

/// Mean thermal photon number at the transition frequency, shared by every dissipator term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    nbar: f64,
}

impl BathSpec {
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "mean photon number must be non-negative, got {nbar}"
            )));
        }
        Ok(Self { nbar })
    }

    pub fn zero_temperature() -> Self {
        Self { nbar: 0.0 }
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }
}

/// Scale of the atomic self-energy term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfEnergy {
    /// `H_s = Σ ω_i σᶻ_i / 2`: level splitting ω_i.
    #[default]
    HalfSigmaZ,
    /// `H_s = Σ ω_i σᶻ_i`: level splitting 2ω_i.
    FullSigmaZ,
}

impl SelfEnergy {
    pub fn factor(self) -> f64 {
        match self {
            SelfEnergy::HalfSigmaZ => 0.5,
            SelfEnergy::FullSigmaZ => 1.0,
        }
    }
}

/// Which computational basis state is the excited one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisConvention {
    /// `|0⟩` excited (σᶻ = +1), σ⁻ = |1⟩⟨0|.
    #[default]
    ZeroExcited,
    /// `|1⟩` excited, σ⁻ = |0⟩⟨1|. Only meant for sensitivity checks.
    OneExcited,
}

/// How the coupling coefficients are supplied to [`ModelSpec::new`].
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSource {
    Matrices { a: DMatrix<f64>, f: DMatrix<f64> },
    Geometry(Geometry),
}

/// A validated model: atoms, couplings, bath and rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    atoms: Vec<AtomSpec>,
    couplings: CouplingMatrices,
    bath: BathSpec,
    g: f64,
    self_energy: SelfEnergy,
    basis: BasisConvention,
}

impl ModelSpec {
    pub fn new(atoms: Vec<AtomSpec>, bath: BathSpec, source: CouplingSource, g: f64) -> Result<Self> {
        let n = atoms.len();
        if !(1..=MAX_ATOMS).contains(&n) {
            return Err(Error::InvalidModel(format!(
                "between 1 and {MAX_ATOMS} atoms are supported, got {n}"
            )));
        }
        let couplings = match source {
            CouplingSource::Matrices { a, f } => {
                let omegas: Vec<f64> = atoms.iter().map(AtomSpec::omega).collect();
                CouplingMatrices::from_matrices(a, f, &omegas, g)?
            }
            CouplingSource::Geometry(geometry) => build_couplings(&geometry, &atoms, g)?,
        };
        Ok(Self {
            atoms,
            couplings,
            bath,
            g,
            self_energy: SelfEnergy::default(),
            basis: BasisConvention::default(),
        })
    }

    pub fn with_self_energy(mut self, self_energy: SelfEnergy) -> Self {
        self.self_energy = self_energy;
        self
    }

    pub fn with_basis(mut self, basis: BasisConvention) -> Self {
        self.basis = basis;
        self
    }

    /// Same model with every exchange coupling set to zero.
    pub fn without_exchange(&self) -> Self {
        let mut out = self.clone();
        out.couplings.f.fill(0.0);
        out
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn atoms(&self) -> &[AtomSpec] {
        &self.atoms
    }

    pub fn couplings(&self) -> &CouplingMatrices {
        &self.couplings
    }

    pub fn bath(&self) -> BathSpec {
        self.bath
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn self_energy(&self) -> SelfEnergy {
        self.self_energy
    }

    pub fn basis(&self) -> BasisConvention {
        self.basis
    }

    /// Rebuilds the model from (possibly modified) parts in matrix mode,
    /// keeping the conventions.
    pub fn rebuild(
        &self,
        atoms: Vec<AtomSpec>,
        a: DMatrix<f64>,
        f: DMatrix<f64>,
        bath: BathSpec,
        g: f64,
    ) -> Result<Self> {
        Ok(Self::new(atoms, bath, CouplingSource::Matrices { a, f }, g)?
            .with_self_energy(self.self_energy)
            .with_basis(self.basis))
    }

    /// Same dynamics, different initial states.
    pub fn with_atoms(&self, atoms: Vec<AtomSpec>) -> Result<Self> {
        self.rebuild(
            atoms,
            self.couplings.a.clone(),
            self.couplings.f.clone(),
            self.bath,
            self.g,
        )
    }
}
