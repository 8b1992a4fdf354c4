//! Reusable circuit building blocks: multi-controlled gates, ripple adders,
//! banded sparsity walkers, multiplexed rotations and amplitude loaders.
//!
//! Every emitter appends gates to a caller-owned [`crate::circuit::Circuit`]
//! and leaves any ancilla qubits it borrows in |0>. Cost helpers return the
//! exact one-qubit and CNOT counts the matching emitter produces, so tests
//! can pin them with equality rather than inequality.

pub mod adder;
pub mod banded;
pub mod binary_norm;
pub mod momentum;
pub mod multicontrol;
pub mod multiplex;
pub mod state_prep;
