//! In-place modular addition on quantum registers.
//!
//! [`emit_add_into`] maps |acc>|add> to |acc + add mod 2^n>|add> with a
//! single clean carry ancilla, using the MAJ/UMA ripple of Cuccaro et al.
//! Dropping the carry-out CNOT makes the sum wrap mod 2^n, which is exactly
//! the periodic index arithmetic the banded sparsity walker needs.

use crate::circuit::{emit_toffoli, Circuit, Gate};

/// Exact (one-qubit, CNOT) cost of [`emit_add_into`] on `n`-qubit registers.
#[inline]
#[must_use]
pub fn adder_cost(n: usize) -> (usize, usize) {
    if n == 1 {
        (0, 1)
    } else {
        (16 * n, 16 * n)
    }
}

/// Carry ancillas consumed by [`emit_add_into`].
#[inline]
#[must_use]
pub fn adder_ancillas(n: usize) -> usize {
    usize::from(n > 1)
}

fn maj(out: &mut Circuit, c: usize, b: usize, a: usize) {
    out.push(Gate::Cx(a, b));
    out.push(Gate::Cx(a, c));
    emit_toffoli(out, c, b, a);
}

fn uma(out: &mut Circuit, c: usize, b: usize, a: usize) {
    emit_toffoli(out, c, b, a);
    out.push(Gate::Cx(a, c));
    out.push(Gate::Cx(c, b));
}

/// Appends |acc>|add> -> |acc + add mod 2^n>|add>.
///
/// `acc` and `add` are equal-width qubit slices, MSB first. `carry` is a
/// clean ancilla, used only for widths above one and restored to |0>.
pub fn emit_add_into(out: &mut Circuit, acc: &[usize], add: &[usize], carry: usize) {
    let n = acc.len();
    assert_eq!(n, add.len(), "register widths differ");
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(Gate::Cx(add[0], acc[0]));
        return;
    }
    let a: Vec<usize> = add.iter().rev().copied().collect();
    let b: Vec<usize> = acc.iter().rev().copied().collect();
    maj(out, carry, b[0], a[0]);
    for i in 1..n {
        maj(out, a[i - 1], b[i], a[i]);
    }
    for i in (1..n).rev() {
        uma(out, a[i - 1], b[i], a[i]);
    }
    uma(out, carry, b[0], a[0]);
}
