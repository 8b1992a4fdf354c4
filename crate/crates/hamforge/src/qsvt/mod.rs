//! Polynomial transforms of block-encoded operators.
//!
//! [`phases`] carries the scalar signal model: a phase list acts on a value
//! x in [-1, 1] through an alternating product of reflections and phase
//! rotations, and a damped least-squares solver inverts that map for bounded
//! definite-parity targets. [`diag_be`] turns any state-preparation circuit
//! into a block encoding of the diagonal matrix of its amplitudes.
//! [`poly_oracle`] composes the two into circuits whose flagged block is a
//! polynomial applied entrywise to the coordinate grid.

pub mod diag_be;
pub mod phases;
pub mod poly_oracle;
