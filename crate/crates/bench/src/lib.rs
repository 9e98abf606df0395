//! Fixtures shared by the benchmarks.

use colsync::presets;
use colsync::sweep::{ThirdAtomState, ThreeAtomLayout};
use colsync::ModelSpec;

/// Detuned pair with exchange and a warm bath: no symmetry shortcuts.
pub fn generic_pair() -> ModelSpec {
    presets::two_atom(1.08, 0.7, 0.03, 0.5).expect("valid fixture")
}

pub fn chain_triple() -> ModelSpec {
    ThreeAtomLayout::Chain
        .model(ThirdAtomState::Psi)
        .expect("valid fixture")
}
