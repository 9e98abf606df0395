//! End-to-end run of one model: propagate, extract local observables, and
//! classify every atom pair.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_liouvillian, propagate_adaptive, propagate_spectral, time_grid, AdaptiveOptions,
    DensityMatrix, Trajectory,
};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::observables::Pauli;
use crate::sync::{classify, sliding_pearson, SyncThresholds, SyncVerdict, WindowConfig, WindowedSeries};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Adaptive,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub window: WindowConfig,
    pub thresholds: SyncThresholds,
    pub sample_step: f64,
    pub final_time: f64,
    pub method: Method,
    /// Relative tolerance of the adaptive integrator.
    pub tol: f64,
    pub axis: Pauli,
    /// Atom pairs (0-based, `i < j`); `None` means every pair.
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window: WindowConfig::default(),
            thresholds: SyncThresholds::default(),
            sample_step: 0.15,
            final_time: 400.0,
            method: Method::Adaptive,
            tol: 1e-9,
            axis: Pauli::X,
            pairs: None,
        }
    }
}

impl AnalysisConfig {
    pub fn with_final_time(mut self, final_time: f64) -> Self {
        self.final_time = final_time;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        self.window.validate(self.sample_step)
    }

    /// Pairs to analyse, validated against `n_atoms`.
    pub fn resolved_pairs(&self, n_atoms: usize) -> Result<Vec<(usize, usize)>> {
        match &self.pairs {
            None => Ok(all_pairs(n_atoms)),
            Some(pairs) => {
                for &(i, j) in pairs {
                    if i >= j || j >= n_atoms {
                        return Err(Error::InvalidArgument(format!(
                            "pair ({}, {}) is not i < j ≤ {n_atoms}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
                Ok(pairs.clone())
            }
        }
    }
}

/// Every `(i, j)` with `i < j`, lexicographic.
pub fn all_pairs(n_atoms: usize) -> Vec<(usize, usize)> {
    (0..n_atoms)
        .flat_map(|i| (i + 1..n_atoms).map(move |j| (i, j)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub windowed: Vec<WindowedSeries>,
    pub verdicts: Vec<SyncVerdict>,
}

impl Simulation {
    /// Windowed series and verdict of one pair (0-based).
    pub fn pair(&self, i: usize, j: usize) -> Option<(&WindowedSeries, &SyncVerdict)> {
        self.windowed
            .iter()
            .zip(&self.verdicts)
            .find(|(w, _)| w.pair == (i, j))
    }
}

/// Propagates `model` from its product initial state on the sampling grid.
pub fn propagate(model: &ModelSpec, cfg: &AnalysisConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let l = build_liouvillian(model);
    let rho0 = DensityMatrix::product(model.atoms());
    let times = time_grid(cfg.final_time, cfg.sample_step)?;
    match cfg.method {
        Method::Adaptive => propagate_adaptive(&l, &rho0, &times, AdaptiveOptions::with_tolerance(cfg.tol)),
        Method::Spectral => propagate_spectral(&l, &rho0, &times),
    }
}

/// Windowed correlations and verdicts for an existing trajectory.
pub fn analyse(trajectory: Trajectory, cfg: &AnalysisConfig) -> Result<Simulation> {
    let pairs = cfg.resolved_pairs(trajectory.n_atoms())?;
    let mut windowed = Vec::with_capacity(pairs.len());
    let mut verdicts = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let x = trajectory.pauli_series(i, cfg.axis)?;
        let y = trajectory.pauli_series(j, cfg.axis)?;
        let w = sliding_pearson(&x, &y, &cfg.window)?;
        verdicts.push(classify(&w, &cfg.thresholds));
        windowed.push(w);
    }
    Ok(Simulation {
        trajectory,
        windowed,
        verdicts,
    })
}

pub fn simulate(model: &ModelSpec, cfg: &AnalysisConfig) -> Result<Simulation> {
    analyse(propagate(model, cfg)?, cfg)
}
