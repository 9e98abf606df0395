//! Parameter grids, random-state coherence ensembles and the three-atom
//! scenarios.
//!
//! Parameters are addressed by dotted paths with 1-based atom indices:
//!
//! | path                 | meaning                          |
//! |----------------------|----------------------------------|
//! | `atoms[i].omega`     | transition frequency of atom i   |
//! | `atoms[i].theta`     | initial-state polar angle        |
//! | `atoms[i].phi`       | initial-state relative phase     |
//! | `couplings.a[i][j]`  | collectivity, set symmetrically  |
//! | `couplings.f[i][j]`  | exchange, set symmetrically      |
//! | `bath.nbar`          | mean thermal photon number       |
//! | `g`                  | spontaneous-rate prefactor       |
//!
//! Cells are independent: every grid point is rebuilt from the base model in
//! matrix form, validated, propagated and reduced on its own, and results are
//! merged by cell index.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyse, propagate, AnalysisConfig, Simulation};
use crate::dynamics::{build_liouvillian, check_snapshot, DensityMatrix, SpectralPropagator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{AtomSpec, ModelSpec};
use crate::observables::l1_coherence_matrix;
use crate::presets::{self, StateAngles};
use crate::sync::{final_pearson, SyncKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParamPath {
    Omega(usize),
    Theta(usize),
    Phi(usize),
    CouplingA(usize, usize),
    CouplingF(usize, usize),
    Nbar,
    G,
}

impl ParamPath {
    /// Largest atom index referenced (0-based), if any.
    fn max_atom(&self) -> Option<usize> {
        match *self {
            ParamPath::Omega(i) | ParamPath::Theta(i) | ParamPath::Phi(i) => Some(i),
            ParamPath::CouplingA(i, j) | ParamPath::CouplingF(i, j) => Some(i.max(j)),
            ParamPath::Nbar | ParamPath::G => None,
        }
    }

    pub fn check(&self, n_atoms: usize) -> Result<()> {
        match self.max_atom() {
            Some(i) if i >= n_atoms => Err(Error::UnknownPath(format!(
                "{self} refers to atom {} but the model has {n_atoms}",
                i + 1
            ))),
            _ => Ok(()),
        }
    }

    /// Current value in `model`.
    pub fn get(&self, model: &ModelSpec) -> Result<f64> {
        self.check(model.n_atoms())?;
        let c = model.couplings();
        Ok(match *self {
            ParamPath::Omega(i) => model.atoms()[i].omega(),
            ParamPath::Theta(i) => model.atoms()[i].theta(),
            ParamPath::Phi(i) => model.atoms()[i].phi(),
            ParamPath::CouplingA(i, j) => c.a()[(i, j)],
            ParamPath::CouplingF(i, j) => c.f()[(i, j)],
            ParamPath::Nbar => model.bath().nbar(),
            ParamPath::G => model.g(),
        })
    }

    /// Copy of `model` with this parameter set to `value`, fully revalidated.
    pub fn apply(&self, model: &ModelSpec, value: f64) -> Result<ModelSpec> {
        self.check(model.n_atoms())?;
        let mut atoms = model.atoms().to_vec();
        let mut a = model.couplings().a().clone();
        let mut f = model.couplings().f().clone();
        let mut nbar = model.bath().nbar();
        let mut g = model.g();
        match *self {
            ParamPath::Omega(i) => atoms[i] = atoms[i].with_omega(value)?,
            ParamPath::Theta(i) => atoms[i] = atoms[i].with_angles(value, atoms[i].phi())?,
            ParamPath::Phi(i) => atoms[i] = atoms[i].with_angles(atoms[i].theta(), value)?,
            ParamPath::CouplingA(i, j) => {
                a[(i, j)] = value;
                a[(j, i)] = value;
            }
            ParamPath::CouplingF(i, j) => {
                f[(i, j)] = value;
                f[(j, i)] = value;
            }
            ParamPath::Nbar => nbar = value,
            ParamPath::G => g = value,
        }
        model.rebuild(atoms, a, f, crate::model::BathSpec::new(nbar)?, g)
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParamPath::Omega(i) => write!(f, "atoms[{}].omega", i + 1),
            ParamPath::Theta(i) => write!(f, "atoms[{}].theta", i + 1),
            ParamPath::Phi(i) => write!(f, "atoms[{}].phi", i + 1),
            ParamPath::CouplingA(i, j) => write!(f, "couplings.a[{}][{}]", i + 1, j + 1),
            ParamPath::CouplingF(i, j) => write!(f, "couplings.f[{}][{}]", i + 1, j + 1),
            ParamPath::Nbar => f.write_str("bath.nbar"),
            ParamPath::G => f.write_str("g"),
        }
    }
}

fn parse_index(s: &str, path: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i - 1),
        _ => Err(Error::UnknownPath(format!("bad 1-based index `{s}` in `{path}`"))),
    }
}

/// `"[i][j]"` → `(i, j)`, 0-based.
fn parse_pair(rest: &str, path: &str) -> Result<(usize, usize)> {
    let bad = || Error::UnknownPath(format!("expected `[i][j]` in `{path}`"));
    let inner = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
    let (i, j) = inner.split_once("][").ok_or_else(bad)?;
    let (i, j) = (parse_index(i, path)?, parse_index(j, path)?);
    if i == j {
        return Err(Error::UnknownPath(format!(
            "`{path}` addresses a diagonal entry, which is fixed"
        )));
    }
    Ok((i, j))
}

impl FromStr for ParamPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let path = s.trim();
        match path {
            "bath.nbar" => return Ok(ParamPath::Nbar),
            "g" => return Ok(ParamPath::G),
            _ => {}
        }
        if let Some(rest) = path.strip_prefix("couplings.a") {
            let (i, j) = parse_pair(rest, path)?;
            return Ok(ParamPath::CouplingA(i, j));
        }
        if let Some(rest) = path.strip_prefix("couplings.f") {
            let (i, j) = parse_pair(rest, path)?;
            return Ok(ParamPath::CouplingF(i, j));
        }
        if let Some(rest) = path.strip_prefix("atoms[") {
            if let Some((idx, field)) = rest.split_once("].") {
                let i = parse_index(idx, path)?;
                return match field {
                    "omega" => Ok(ParamPath::Omega(i)),
                    "theta" => Ok(ParamPath::Theta(i)),
                    "phi" => Ok(ParamPath::Phi(i)),
                    _ => Err(Error::UnknownPath(path.to_string())),
                };
            }
        }
        Err(Error::UnknownPath(path.to_string()))
    }
}

impl TryFrom<String> for ParamPath {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParamPath> for String {
    fn from(p: ParamPath) -> String {
        p.to_string()
    }
}

/// One sweep axis: a parameter and its strictly monotone value grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub path: ParamPath,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(path: ParamPath, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("axis {path} has no values")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("axis {path} has non-finite values")));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidArgument(format!(
                "axis {path} values must be strictly monotone"
            )));
        }
        Ok(Self { path, values })
    }

    /// `count` evenly spaced values from `start` to `end` inclusive.
    pub fn linspace(path: ParamPath, start: f64, end: f64, count: usize) -> Result<Self> {
        let values = match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|k| {
                    if k == count - 1 {
                        end
                    } else {
                        start + (end - start) * k as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        };
        Self::new(path, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How each cell is reduced to a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducer {
    /// Final windowed Pearson coefficient of a pair (0-based, `i < j`).
    FinalPearson { pair: (usize, usize) },
    /// l1-norm coherence of the global state at the final time, averaged
    /// over an ensemble of product initial states.
    MeanL1Coherence,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ModelSpec,
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
    pub analysis: AnalysisConfig,
    pub reducer: Reducer,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.base.n_atoms();
        self.axis1.path.check(n)?;
        if let Some(ax) = &self.axis2 {
            ax.path.check(n)?;
            if ax.path == self.axis1.path {
                return Err(Error::InvalidArgument(format!(
                    "both axes sweep {}",
                    ax.path
                )));
            }
        }
        if let Reducer::FinalPearson { pair: (i, j) } = self.reducer {
            if i >= j || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "pair ({}, {}) is not i < j ≤ {n}",
                    i + 1,
                    j + 1
                )));
            }
        }
        self.analysis.validate()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.as_ref().map_or(1, SweepAxis::len))
    }

    /// Model of cell `(i1, i2)`.
    pub fn cell_model(&self, i1: usize, i2: usize) -> Result<ModelSpec> {
        let m = self.axis1.path.apply(&self.base, self.axis1.values[i1])?;
        match &self.axis2 {
            Some(ax) => ax.path.apply(&m, ax.values[i2]),
            None => Ok(m),
        }
    }

    fn cell_coords(&self, idx: usize) -> (usize, usize) {
        let (_, n2) = self.shape();
        (idx / n2, idx % n2)
    }
}

/// Row-major grid of reduced values; cell `(i1, i2)` sits at `i1 · n2 + i2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
    pub values: Vec<Option<f64>>,
    pub verdicts: Vec<Option<SyncKind>>,
    /// Standard error of ensemble means; `None` outside coherence maps.
    pub std_errors: Option<Vec<Option<f64>>>,
    /// Failure message of each missing cell.
    pub errors: Vec<Option<String>>,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.as_ref().map_or(1, SweepAxis::len))
    }

    pub fn get(&self, i1: usize, i2: usize) -> Option<f64> {
        let (_, n2) = self.shape();
        self.values[i1 * n2 + i2]
    }

    /// `(x1, x2, value, verdict)` in row-major order; `x2` is `None` on 1-D sweeps.
    pub fn cells(&self) -> impl Iterator<Item = (f64, Option<f64>, Option<f64>, Option<SyncKind>)> + '_ {
        let (_, n2) = self.shape();
        (0..self.values.len()).map(move |k| {
            let x1 = self.axis1.values[k / n2];
            let x2 = self.axis2.as_ref().map(|a| a.values[k % n2]);
            (x1, x2, self.values[k], self.verdicts[k])
        })
    }

    pub fn failures(&self) -> usize {
        self.errors.iter().filter(|e| e.is_some()).count()
    }
}

fn pearson_cell(spec: &SweepSpec, idx: usize, pair: (usize, usize)) -> Result<(f64, SyncKind)> {
    let (i1, i2) = spec.cell_coords(idx);
    let model = spec.cell_model(i1, i2)?;
    let cfg = AnalysisConfig {
        pairs: Some(vec![pair]),
        ..spec.analysis.clone()
    };
    let sim = analyse(propagate(&model, &cfg)?, &cfg)?;
    let value = final_pearson(&sim.windowed[0], cfg.final_time).ok_or(Error::UndefinedCorrelation)?;
    Ok((value, sim.verdicts[0].kind))
}

/// One analysis per grid cell, evaluated in parallel. A cell whose model is
/// invalid or whose propagation fails becomes a missing value.
///
/// With [`Reducer::MeanL1Coherence`] each cell uses the base model's own
/// initial state; see [`run_coherence_map`] for ensembles.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let (n1, n2) = spec.shape();
    let cells: Vec<Result<(f64, Option<SyncKind>)>> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| match spec.reducer {
            Reducer::FinalPearson { pair } => pearson_cell(spec, idx, pair).map(|(v, k)| (v, Some(k))),
            Reducer::MeanL1Coherence => {
                let (i1, i2) = spec.cell_coords(idx);
                let model = spec.cell_model(i1, i2)?;
                let angles: Vec<StateAngles> =
                    model.atoms().iter().map(|a| (a.theta(), a.phi())).collect();
                coherence_cell(&model, spec.analysis.final_time, std::slice::from_ref(&angles))
                    .map(|(mean, _)| (mean, None))
            }
        })
        .collect();

    let mut values = Vec::with_capacity(cells.len());
    let mut verdicts = Vec::with_capacity(cells.len());
    let mut errors = Vec::with_capacity(cells.len());
    for cell in cells {
        match cell {
            Ok((v, k)) => {
                values.push(Some(v));
                verdicts.push(k);
                errors.push(None);
            }
            Err(e) => {
                values.push(None);
                verdicts.push(None);
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(SweepResult {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        values,
        verdicts,
        std_errors: None,
        errors,
    })
}

/// Random product initial states: per atom `θ ~ U[0, 2π]`, `φ ~ U[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub samples: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            samples: 2000,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    /// The sampled angles, `samples × n_atoms`. Every cell of a map shares
    /// this list, so cell-to-cell differences carry no sampling noise.
    pub fn draw(&self, n_atoms: usize) -> Result<Vec<Vec<StateAngles>>> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one sample".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.samples)
            .map(|_| {
                (0..n_atoms)
                    .map(|_| {
                        let theta = rng.random_range(0.0..=std::f64::consts::TAU);
                        let phi = rng.random_range(0.0..=std::f64::consts::PI);
                        (theta, phi)
                    })
                    .collect()
            })
            .collect())
    }
}

/// Mean and standard error of the final-time l1 coherence over `samples`.
fn coherence_cell(model: &ModelSpec, final_time: f64, samples: &[Vec<StateAngles>]) -> Result<(f64, f64)> {
    let l = build_liouvillian(model);
    let dim = model.dim();
    let prop = SpectralPropagator::new(&l).matrix_at(final_time);
    let mut values = Vec::with_capacity(samples.len());
    for angles in samples {
        let atoms = model
            .atoms()
            .iter()
            .zip(angles)
            .map(|(a, &(theta, phi))| a.with_angles(theta, phi))
            .collect::<Result<Vec<AtomSpec>>>()?;
        let rho0 = DensityMatrix::product(&atoms);
        let v = &prop * rho0.to_vector();
        let state = DensityMatrix::from_matrix_unchecked(linalg::unvectorize(&v, dim))?;
        check_snapshot(&state, final_time)?;
        values.push(l1_coherence_matrix(state.matrix()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, std_error))
}

/// Per cell, the ensemble mean of the global state's l1 coherence at the
/// final analysis time.
pub fn run_coherence_map(spec: &SweepSpec, ensemble: &EnsembleSpec) -> Result<SweepResult> {
    if spec.reducer != Reducer::MeanL1Coherence {
        return Err(Error::InvalidArgument(
            "coherence maps need the mean-l1-coherence reducer".into(),
        ));
    }
    spec.validate()?;
    let samples = ensemble.draw(spec.base.n_atoms())?;
    let (n1, n2) = spec.shape();
    let cells: Vec<Result<(f64, f64)>> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let (i1, i2) = spec.cell_coords(idx);
            let model = spec.cell_model(i1, i2)?;
            coherence_cell(&model, spec.analysis.final_time, &samples)
        })
        .collect();
    let mut values = Vec::with_capacity(cells.len());
    let mut std_errors = Vec::with_capacity(cells.len());
    let mut errors = Vec::with_capacity(cells.len());
    for cell in cells {
        match cell {
            Ok((m, s)) => {
                values.push(Some(m));
                std_errors.push(Some(s));
                errors.push(None);
            }
            Err(e) => {
                values.push(None);
                std_errors.push(None);
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(SweepResult {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        verdicts: vec![None; values.len()],
        values,
        std_errors: Some(std_errors),
        errors,
    })
}

/// Spearman rank correlation over the positions where both inputs are
/// defined; ties get average ranks.
pub fn spearman(x: &[Option<f64>], y: &[Option<f64>]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("spearman needs equal lengths".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    crate::sync::pearson(&ranks(&xs), &ranks(&ys))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k + 1;
        while end < order.len() && v[order[end]] == v[order[k]] {
            end += 1;
        }
        let avg = (k + end - 1) as f64 / 2.0 + 1.0;
        for &i in &order[k..end] {
            out[i] = avg;
        }
        k = end;
    }
    out
}

/// Collectivity layouts of three resonant atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThreeAtomLayout {
    /// All three atoms effectively coincident: every `a_ij = 1`.
    FullyCollective,
    /// Atom 1 between atoms 2 and 3: `a₁₂ = a₁₃ = 0.8`, `a₂₃ = 0.4`.
    Chain,
}

impl ThreeAtomLayout {
    pub fn collectivities(self) -> [f64; 3] {
        match self {
            ThreeAtomLayout::FullyCollective => [1.0, 1.0, 1.0],
            ThreeAtomLayout::Chain => [0.8, 0.8, 0.4],
        }
    }

    /// The layout's model with atoms in `PSI_S1 ⊗ PSI_S2 ⊗ third`.
    pub fn model(self, third: ThirdAtomState) -> Result<ModelSpec> {
        let [a12, a13, a23] = self.collectivities();
        presets::three_atom(a12, a13, a23, third.angles())
    }
}

/// Initial state of the third atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThirdAtomState {
    /// `cos(π/8)|0⟩ + sin(π/8)|1⟩`.
    Psi,
    /// `(|0⟩ + e^{−iπ/8}|1⟩)/√2`.
    PsiPrime,
}

impl ThirdAtomState {
    pub fn angles(self) -> StateAngles {
        match self {
            ThirdAtomState::Psi => presets::PSI_S3,
            ThirdAtomState::PsiPrime => presets::PSI_S3_PRIME,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThreeAtomOutcome {
    /// Pairs (1,2), (1,3), (2,3) in that order.
    pub simulation: Simulation,
    pub final_values: [Option<f64>; 3],
    /// False if every pair settled anti-synchronized, which three
    /// collectively coupled atoms cannot do.
    pub constraint_respected: bool,
}

/// Runs a three-atom model over all three pairs and checks that the pairs
/// are not all settled anti-synchronized.
pub fn run_three_atom_scenario(model: &ModelSpec, cfg: &AnalysisConfig) -> Result<ThreeAtomOutcome> {
    if model.n_atoms() != 3 {
        return Err(Error::InvalidModel(format!(
            "three-atom scenario needs 3 atoms, got {}",
            model.n_atoms()
        )));
    }
    let cfg = AnalysisConfig {
        pairs: Some(vec![(0, 1), (0, 2), (1, 2)]),
        ..cfg.clone()
    };
    let simulation = analyse(propagate(model, &cfg)?, &cfg)?;
    let mut final_values = [None; 3];
    for (slot, w) in final_values.iter_mut().zip(&simulation.windowed) {
        *slot = final_pearson(w, cfg.final_time);
    }
    let all_anti = simulation.verdicts.iter().all(|v| v.kind != SyncKind::Unsettled)
        && final_values
            .iter()
            .all(|v| v.is_some_and(|v| v <= -1.0 + cfg.thresholds.sync));
    Ok(ThreeAtomOutcome {
        simulation,
        final_values,
        constraint_respected: !all_anti,
    })
}
