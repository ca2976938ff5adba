//! Exact state-vector simulation of a small qubit register.
//!
//! Qubit 0 is the leftmost tensor factor (most significant bit of a basis
//! index) and `|0⟩` carries spin `+1`.

mod evolve;
mod hamiltonian;
mod run;
mod state;

pub use evolve::{evolve, Evolver, Propagator, HERMITICITY_TOLERANCE};
pub use hamiltonian::{
    build_hamiltonian, dense_matrix_bytes, propagation_memory_bytes, Hamiltonian,
    HamiltonianSpec, DEFAULT_MAX_QUBITS,
};
pub use run::{linspace, retrieval_run, retrieval_run_with_states, ObservableTrace, RunSpec};
pub use state::{
    basis_index, basis_spins, measure_overlaps, qubit_mask, sample_measurement, uniform_state,
    z_sign, StateVector, NORM_TOLERANCE,
};
