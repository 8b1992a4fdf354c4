//! Multi-controlled gates over arbitrary control polarities.
//!
//! A control pattern is a list of (qubit, wanted-bit) pairs; the payload fires
//! only on basis states where every control qubit reads its wanted bit.
//! Negative controls are handled by conjugating that qubit with X. For m >= 3
//! positive controls, C^m X is folded through a chain of Toffolis into clean
//! ancillas: 2m-3 Toffolis and m-2 ancillas, each ancilla returned to |0>.
//! A generic controlled payload needs one more Toffoli layer (m-1 of them,
//! m-1 ancillas) to collect the full conjunction onto a single ancilla.

use crate::circuit::{emit_toffoli, Circuit, Gate};

/// One control: flat qubit index and the bit value that activates the gate.
pub type Control = (usize, bool);

/// Ancillas consumed by [`emit_mcx`] for `m` controls.
#[inline]
#[must_use]
pub fn mcx_ancillas(m: usize) -> usize {
    m.saturating_sub(2)
}

/// Ancillas consumed by [`emit_mc_gate`] for `m` controls.
#[inline]
#[must_use]
pub fn mc_gate_ancillas(m: usize) -> usize {
    m.saturating_sub(1)
}

/// Exact (one-qubit, CNOT) cost of [`emit_mcx`] with `m` controls, `zeros` of
/// which are negative.
#[inline]
#[must_use]
pub fn mcx_bound(m: usize, zeros: usize) -> (usize, usize) {
    match m {
        0 => (1, 0),
        1 => (2 * zeros, 1),
        _ => (8 * (2 * m - 3) + 2 * zeros, 6 * (2 * m - 3)),
    }
}

fn conjugate_zeros(out: &mut Circuit, controls: &[Control]) {
    for &(q, want) in controls {
        if !want {
            out.push(Gate::X(q));
        }
    }
}

/// Appends X on `target` controlled on the full `controls` pattern.
///
/// `anc` must provide at least [`mcx_ancillas`]`(controls.len())` clean
/// qubits; they are restored to |0>.
pub fn emit_mcx(out: &mut Circuit, controls: &[Control], target: usize, anc: &[usize]) {
    let m = controls.len();
    conjugate_zeros(out, controls);
    match m {
        0 => out.push(Gate::X(target)),
        1 => out.push(Gate::Cx(controls[0].0, target)),
        2 => emit_toffoli(out, controls[0].0, controls[1].0, target),
        _ => {
            let mut fold = Circuit::new(out.n_qubits);
            emit_toffoli(&mut fold, controls[0].0, controls[1].0, anc[0]);
            for j in 2..m - 1 {
                emit_toffoli(&mut fold, controls[j].0, anc[j - 2], anc[j - 1]);
            }
            out.extend(&fold);
            emit_toffoli(out, controls[m - 1].0, anc[m - 3], target);
            out.extend(&fold.inverse_of());
        }
    }
    conjugate_zeros(out, controls);
}

fn emit_controlled(out: &mut Circuit, ctrl: usize, g: Gate) {
    let mut one = Circuit::new(out.n_qubits);
    one.push(g);
    one.controlled_of(ctrl, out);
}

/// Appends `inner` controlled on the full `controls` pattern.
///
/// `inner` must be a one-qubit gate off the control qubits, or a global
/// phase (which controls to u3(0,0,theta)). `anc` must provide at least
/// [`mc_gate_ancillas`]`(controls.len())` clean qubits; the conjunction of
/// all controls is folded onto the last one, the payload is controlled on
/// it, and the fold is undone.
pub fn emit_mc_gate(out: &mut Circuit, controls: &[Control], inner: Gate, anc: &[usize]) {
    if let Gate::X(t) = inner {
        emit_mcx(out, controls, t, anc);
        return;
    }
    let m = controls.len();
    conjugate_zeros(out, controls);
    match m {
        0 => out.push(inner),
        1 => emit_controlled(out, controls[0].0, inner),
        _ => {
            let mut fold = Circuit::new(out.n_qubits);
            emit_toffoli(&mut fold, controls[0].0, controls[1].0, anc[0]);
            for j in 2..m {
                emit_toffoli(&mut fold, controls[j].0, anc[j - 2], anc[j - 1]);
            }
            out.extend(&fold);
            emit_controlled(out, anc[m - 2], inner);
            out.extend(&fold.inverse_of());
        }
    }
    conjugate_zeros(out, controls);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_on_basis, unitary_of};
    use num_complex::Complex64;

    fn mcx_circuit(m: usize, pattern: usize) -> Circuit {
        let n = m + 1 + mcx_ancillas(m);
        let mut c = Circuit::new(n);
        let controls: Vec<Control> = (0..m)
            .map(|j| (j, (pattern >> (m - 1 - j)) & 1 == 1))
            .collect();
        let anc: Vec<usize> = (m + 1..n).collect();
        emit_mcx(&mut c, &controls, m, &anc);
        c
    }

    #[test]
    fn mcx_matches_truth_table_exhaustively() {
        for m in 0..=4usize {
            let n = m + 1 + mcx_ancillas(m);
            for pattern in 0..1usize << m {
                let c = mcx_circuit(m, pattern);
                for input in 0..1usize << (m + 1) {
                    let idx = input << mcx_ancillas(m);
                    let state = run_on_basis(&c, idx);
                    let ctrl_val = input >> 1;
                    let flip = ctrl_val == pattern;
                    let expected = (input ^ usize::from(flip)) << mcx_ancillas(m);
                    for (k, amp) in state.iter().enumerate() {
                        let want = if k == expected { 1.0 } else { 0.0 };
                        assert!(
                            (amp - Complex64::new(want, 0.0)).norm() < 1e-12,
                            "m={m} pattern={pattern:b} input={input:b} k={k} amp={amp} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mcx_cost_is_exact() {
        for m in 0..=5usize {
            for pattern in 0..1usize << m {
                let c = mcx_circuit(m, pattern);
                let zeros = m - (pattern.count_ones() as usize);
                let (ones, cnots) = mcx_bound(m, zeros);
                assert_eq!(c.count_1q(), ones, "m={m} pattern={pattern:b}");
                assert_eq!(c.count_cx(), cnots, "m={m} pattern={pattern:b}");
            }
        }
    }

    #[test]
    fn controlled_ry_costs_two_and_two() {
        let mut out = Circuit::new(2);
        emit_controlled(&mut out, 0, Gate::Ry(1, 0.7));
        assert_eq!((out.count_1q(), out.count_cx()), (2, 2));
    }

    fn dense_expected(m: usize, pattern: usize, inner: Gate) -> nalgebra::DMatrix<Complex64> {
        let na = mc_gate_ancillas(m);
        let n = m + 1 + na;
        let dim = 1usize << n;
        let g = inner.matrix();
        let mut e = nalgebra::DMatrix::<Complex64>::identity(dim, dim);
        for col in 0..dim {
            let ctrl_val = col >> (1 + na);
            if ctrl_val != pattern {
                continue;
            }
            let t_bit = (col >> na) & 1;
            match inner {
                Gate::GPhase(th) => {
                    e[(col, col)] = Complex64::from_polar(1.0, th);
                }
                _ => {
                    let u = g.unwrap();
                    let flip = col ^ (1 << na);
                    e[(col, col)] = u[t_bit][t_bit];
                    e[(flip, col)] = u[1 - t_bit][t_bit];
                }
            }
        }
        e
    }

    #[test]
    fn mc_gate_matches_dense_payload() {
        for m in 0..=4usize {
            let na = mc_gate_ancillas(m);
            let n = m + 1 + na;
            for pattern in [0usize, (1 << m) - 1, if m > 1 { 0b10 } else { 0 }] {
                if pattern >= 1 << m {
                    continue;
                }
                for inner in [Gate::Ry(m, 0.7), Gate::GPhase(1.1)] {
                    let mut c = Circuit::new(n);
                    let controls: Vec<Control> = (0..m)
                        .map(|j| (j, (pattern >> (m - 1 - j)) & 1 == 1))
                        .collect();
                    let anc: Vec<usize> = (m + 1..n).collect();
                    let inner = match inner {
                        Gate::Ry(_, th) => Gate::Ry(m, th),
                        g => g,
                    };
                    emit_mc_gate(&mut c, &controls, inner, &anc);
                    let u = unitary_of(&c);
                    let e = dense_expected(m, pattern, inner);
                    let mut worst = 0.0f64;
                    for col in 0..e.ncols() {
                        if col & ((1 << na) - 1) != 0 {
                            continue;
                        }
                        for row in 0..e.nrows() {
                            worst = worst.max((u[(row, col)] - e[(row, col)]).norm());
                        }
                    }
                    assert!(worst < 1e-12, "m={m} pattern={pattern:b} worst={worst}");
                }
            }
        }
    }

    #[test]
    fn mc_gate_ladder_cost_for_zero_pattern() {
        for m in 2..=6usize {
            let na = mc_gate_ancillas(m);
            let n = m + 1 + na;
            let mut c = Circuit::new(n);
            let controls: Vec<Control> = (0..m).map(|j| (j, false)).collect();
            let anc: Vec<usize> = (m + 1..n).collect();
            emit_mc_gate(&mut c, &controls, Gate::Ry(m, 0.3), &anc);
            assert_eq!(c.count_1q(), 18 * m - 14, "m={m}");
            assert_eq!(c.count_cx(), 12 * m - 10, "m={m}");
        }
    }
}
