//! Sparse access to banded circulant structure.
//!
//! A matrix whose nonzero diagonals sit at offsets {o_1, ..., o_k} (mod N,
//! N = 2^n) admits a column function c(s, i) = r_s + i mod N, where slot s
//! indexes a band. The access pair is
//!
//!   U_A: |s> -> |r_s>  on the row register, for s < 2^l,
//!   U_SUM: |r>|i> -> |r + i mod N>|i>,
//!
//! and their composition is the banded sparse-access oracle. Slots without a
//! band of their own map to themselves, so they cost no gates and the walker
//! stays a permutation.
//!
//! U_A is a product of transpositions U_s = (s r_s), emitted for s from
//! 2^l - 1 down to 0. Each assignment satisfies r_s >= s and values are
//! pairwise distinct, so at the moment U_s acts, no state of the evolving
//! superposition equals r_s and the flag qubit toggles cleanly: match s,
//! flip the differing row bits, unmatch r_s.

use crate::circuit::Circuit;
use crate::circuit::Gate;
use crate::primitives::adder::emit_add_into;
use crate::primitives::multicontrol::{emit_mcx, Control};

/// Smallest l with 2^l >= k (k >= 1).
#[inline]
#[must_use]
pub fn ceil_log2(k: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < k {
        l += 1;
    }
    l
}

/// Slot-to-row assignment for a set of band offsets.
#[derive(Clone, Debug)]
pub struct SlotPlan {
    /// Register width; row values live in [0, 2^n).
    pub n: usize,
    /// Select width; slots live in [0, 2^l).
    pub l: usize,
    /// Row value r_s for each slot.
    pub r: Vec<usize>,
    /// Whether the slot carries one of the requested offsets.
    pub real: Vec<bool>,
}

impl SlotPlan {
    /// Number of slots, 2^l.
    #[inline]
    #[must_use]
    pub fn slots(&self) -> usize {
        1 << self.l
    }
}

/// Assigns each band offset to a slot, padding leftover slots with fixed
/// points.
///
/// Offsets must be distinct values below 2^n. Processing slots from high to
/// low, each slot takes the largest unassigned offset that is >= s, or s
/// itself as a fixed point when no such offset remains. Offsets smaller than
/// the current slot index are never stranded: the k distinct offsets below s
/// fit in the s remaining slots, and each is claimed no later than the slot
/// equal to its value.
#[must_use]
pub fn assign_slots(n: usize, offsets: &[usize]) -> SlotPlan {
    let space = 1usize << n;
    assert!(!offsets.is_empty(), "no band offsets");
    assert!(offsets.iter().all(|&o| o < space), "offset out of range");
    let l = ceil_log2(offsets.len());
    assert!(l <= n, "more bands than matrix columns");
    let slots = 1usize << l;
    let mut remaining: Vec<usize> = offsets.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    assert_eq!(remaining.len(), offsets.len(), "duplicate band offset");
    let mut r = vec![0usize; slots];
    let mut real = vec![false; slots];
    for s in (0..slots).rev() {
        if let Some(pos) = remaining.iter().rposition(|&o| o >= s) {
            r[s] = remaining.remove(pos);
            real[s] = true;
        } else {
            r[s] = s;
        }
    }
    assert!(remaining.is_empty(), "stranded band offset");
    SlotPlan { n, l, r, real }
}

/// Upper bound on the (one-qubit, CNOT) cost of [`emit_band_walker`].
#[inline]
#[must_use]
pub fn walker_bound(n: usize, l: usize) -> (usize, usize) {
    ((1 << l) * (36 * n - 48), (1 << l) * (25 * n - 36))
}

/// Ancillas used by [`emit_band_walker`] and [`emit_banded_oracle`]: one
/// flag plus the match-chain for n-bit patterns.
#[inline]
#[must_use]
pub fn banded_ancillas(n: usize) -> usize {
    n - 1
}

fn pattern(row: &[usize], value: usize) -> Vec<Control> {
    let n = row.len();
    (0..n)
        .map(|f| (row[f], (value >> (n - 1 - f)) & 1 == 1))
        .collect()
}

/// Appends U_A: |s> -> |r_s> on `row` for every slot of `plan`.
///
/// `anc` must hold [`banded_ancillas`]`(n)` clean qubits; `anc[0]` is the
/// match flag, the rest feed the multi-control chains.
pub fn emit_band_walker(out: &mut Circuit, row: &[usize], plan: &SlotPlan, anc: &[usize]) {
    let n = row.len();
    assert_eq!(n, plan.n);
    let flag = anc[0];
    let chain = &anc[1..];
    for s in (0..plan.slots()).rev() {
        let rs = plan.r[s];
        if rs == s {
            continue;
        }
        emit_mcx(out, &pattern(row, s), flag, chain);
        for f in 0..n {
            if ((s ^ rs) >> (n - 1 - f)) & 1 == 1 {
                out.push(Gate::Cx(flag, row[f]));
            }
        }
        emit_mcx(out, &pattern(row, rs), flag, chain);
    }
}

/// Appends the banded sparse-access oracle: |s>|i> -> |r_s + i mod 2^n>|i>.
///
/// `row` starts holding the slot index (high bits zero), `col` holds the
/// column index and is preserved. `anc` as in [`emit_band_walker`]; the flag
/// doubles as the adder carry once the walker is done.
pub fn emit_banded_oracle(
    out: &mut Circuit,
    row: &[usize],
    col: &[usize],
    plan: &SlotPlan,
    anc: &[usize],
) {
    emit_band_walker(out, row, plan, anc);
    emit_add_into(out, row, col, anc[0]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_on_basis;

    #[test]
    fn assignment_covers_all_offsets_without_collisions() {
        let n = 3;
        for mask in 1usize..256 {
            let offsets: Vec<usize> = (0..8).filter(|&o| (mask >> o) & 1 == 1).collect();
            let plan = assign_slots(n, &offsets);
            let mut seen = vec![false; 8];
            for s in 0..plan.slots() {
                assert!(plan.r[s] >= s, "mask={mask:#b} slot={s}");
                assert!(!seen[plan.r[s]], "mask={mask:#b} slot={s}");
                seen[plan.r[s]] = true;
            }
            let mut placed: Vec<usize> = (0..plan.slots())
                .filter(|&s| plan.real[s])
                .map(|s| plan.r[s])
                .collect();
            placed.sort_unstable();
            assert_eq!(placed, offsets, "mask={mask:#b}");
        }
    }

    #[test]
    fn fixed_point_slots_emit_nothing() {
        let plan = assign_slots(3, &[0, 1, 3]);
        assert_eq!(plan.r, vec![0, 1, 2, 3]);
        let mut c = Circuit::new(5);
        emit_band_walker(&mut c, &[0, 1, 2], &plan, &[3, 4]);
        assert_eq!(c.gates.len(), 0);
    }

    #[test]
    fn walker_permutes_every_slot_state() {
        let n = 3;
        for mask in 1usize..256 {
            let offsets: Vec<usize> = (0..8).filter(|&o| (mask >> o) & 1 == 1).collect();
            let plan = assign_slots(n, &offsets);
            let total = n + banded_ancillas(n);
            let mut c = Circuit::new(total);
            emit_band_walker(&mut c, &[0, 1, 2], &plan, &[3, 4]);
            let (ones, cnots) = walker_bound(n, plan.l);
            assert!(c.count_1q() <= ones, "mask={mask:#b}");
            assert!(c.count_cx() <= cnots, "mask={mask:#b}");
            for s in 0..plan.slots() {
                let state = run_on_basis(&c, s << banded_ancillas(n));
                let expected = plan.r[s] << banded_ancillas(n);
                for (k, amp) in state.iter().enumerate() {
                    let want = if k == expected { 1.0 } else { 0.0 };
                    assert!(
                        (amp.re - want).abs() < 1e-12 && amp.im.abs() < 1e-12,
                        "mask={mask:#b} s={s} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_adds_column_to_walked_row() {
        let n = 2;
        let offsets = vec![0usize, 2];
        let plan = assign_slots(n, &offsets);
        assert_eq!(plan.l, 1);
        let total = 2 * n + banded_ancillas(n);
        let mut c = Circuit::new(total);
        emit_banded_oracle(&mut c, &[0, 1], &[2, 3], &plan, &[4]);
        for s in 0..plan.slots() {
            for i in 0..1usize << n {
                let input = ((s << n) | i) << 1;
                let state = run_on_basis(&c, input);
                let expected = ((((plan.r[s] + i) % (1 << n)) << n) | i) << 1;
                for (k, amp) in state.iter().enumerate() {
                    let want = if k == expected { 1.0 } else { 0.0 };
                    assert!(
                        (amp.re - want).abs() < 1e-12 && amp.im.abs() < 1e-12,
                        "s={s} i={i} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn bound_matches_frozen_reference_point() {
        assert_eq!(walker_bound(3, 2), (240, 156));
    }
}
