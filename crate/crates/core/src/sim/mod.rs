//! Exact two-qubit state-vector and density-matrix engine.

mod circuit;
mod evolve;
mod execute;
mod state;

pub use circuit::{
    bitstring, parse_bitstring, Circuit, Counts, Distribution, GateStep, REGISTER_WIDTH,
};
pub use evolve::{evolve, propagator};
pub use execute::{
    apply_gate, branches, exact_distribution, expectation, measure_z, run_shots, Branch,
    UNDERFLOW_PROBABILITY,
};
pub use state::{
    basis_index, embed, kron, pauli, DensityMatrix, Mat2, Mat4, Observable, PureState, Vec4,
    ALGEBRA_TOL, C64, DECOMP_TOL,
};

pub(crate) use state::{c, unitary_deviation4};
