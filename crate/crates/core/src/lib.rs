//! Master-equation dynamics of one to four two-level atoms coupled to a
//! common thermal photon bath, with the analysis used to detect transient
//! (anti-)synchronization between their local observables.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: atoms, bath, collective coupling coefficients and validation.
//! * [`dynamics`]: Hamiltonian, Liouvillian and two independent propagators.
//! * [`observables`]: partial traces, Pauli expectations, l1-norm coherence.
//! * [`sync`]: windowed Pearson coefficients and verdict classification.
//! * [`analysis`]: one model in, trajectory plus pairwise verdicts out.
//! * [`sweep`]: parameter grids, coherence ensembles, three-atom scenarios.
//! * [`export`]: CSV and plot-script text for all of the above.
//!
//! Basis convention: `|0⟩` is the excited state (σᶻ = +1) and σ⁻ maps
//! `|0⟩ → |1⟩`. Atom 1 is the leftmost tensor factor, so basis index bits
//! are read most-significant first.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod export;
mod linalg;
pub mod model;
pub mod observables;
pub mod presets;
pub mod sweep;
pub mod sync;

pub use num_complex::Complex64;

pub use analysis::{simulate, AnalysisConfig, Method, Simulation};
pub use dynamics::{
    build_hamiltonian, build_liouvillian, lindblad_spectrum, propagate_adaptive,
    propagate_spectral, steady_state, DensityMatrix, Liouvillian, PropagationRoute, Trajectory,
};
pub use error::{Error, Result};
pub use model::{
    build_couplings, collectivity_a, exchange_f, pair_geometry, AtomSpec, BasisConvention,
    BathSpec, CouplingMatrices, CouplingSource, Geometry, ModelSpec, SelfEnergy,
};
pub use observables::{l1_coherence, partial_trace, pauli_expectation, ObservableSeries, Pauli};
pub use sweep::{
    run_coherence_map, run_sweep, run_three_atom_scenario, EnsembleSpec, ParamPath, Reducer,
    SweepAxis, SweepResult, SweepSpec, ThirdAtomState, ThreeAtomLayout, ThreeAtomOutcome,
};
pub use sync::{
    classify, final_pearson, pearson, sliding_pearson, SyncKind, SyncThresholds, SyncVerdict,
    WindowConfig, WindowedSeries,
};
