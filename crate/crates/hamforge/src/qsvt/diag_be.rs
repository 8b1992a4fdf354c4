//! Diagonal block encodings built from state-preparation circuits.
//!
//! Given a unitary preparing Σ_i ψ_i |i> on h qubits, [`build_real_diag`]
//! emits a circuit whose flag-zero block on the `data` register is
//! diag(Re ψ_i)/√2 with one flag qubit, and [`build_complex_diag`] one whose
//! block is diag(ψ_i)/2 with two. Both leave the internal `work` and `sel`
//! registers exactly pure: starting from |0> they return to |0> inside the
//! flag-zero sector on every basis input, with no approximation.
//!
//! The core gadget compares the prepared profile against a basis state. A
//! mixer splits `sel`; on one branch the preparation runs on `work`, on the
//! other the `data` index is copied there; a second mixer interferes the
//! branches so a phase flip on `sel` reads off the overlap ψ_i. Sandwiching
//! that comparator between a reflection about the all-zero `work`/`sel`
//! state and combining two phased copies linearly leaves an operator whose
//! matrix elements on the |0..0, i> sector are exactly diagonal.

use crate::circuit::{Circuit, Gate, RegKind};
use crate::primitives::multicontrol::{emit_mcx, mcx_ancillas, Control};
use crate::sim::BlockEncoding;

struct DiagSlots {
    work0: usize,
    sel: usize,
    data0: usize,
    scratch0: usize,
    h: usize,
}

fn mapped_prep(prep: &Circuit, slots: &DiagSlots, total: usize) -> Circuit {
    assert!(prep.n_qubits >= slots.h, "prep narrower than its profile");
    let mut map = Vec::with_capacity(prep.n_qubits);
    for j in 0..prep.n_qubits {
        map.push(if j < slots.h {
            slots.work0 + j
        } else {
            slots.scratch0 + (j - slots.h)
        });
    }
    let mut out = Circuit::new(total);
    out.extend_mapped(prep, &map);
    out
}

/// Comparator fragment: mixers around a sel-controlled preparation and a
/// sel-controlled copy of `data` into `work`. `phase_ctrl` inserts a
/// controlled S on `sel` before the closing mixer, switching the read-off
/// overlap from its real to its imaginary part when that control is set.
fn comparator(
    prep_mapped: &Circuit,
    slots: &DiagSlots,
    total: usize,
    real_mixers: bool,
    phase_ctrl: Option<usize>,
) -> Circuit {
    let mut w = Circuit::new(total);
    if real_mixers {
        w.push(Gate::Ry(slots.sel, std::f64::consts::FRAC_PI_2));
    } else {
        w.push(Gate::H(slots.sel));
    }
    w.push(Gate::X(slots.sel));
    prep_mapped.controlled_of(slots.sel, &mut w);
    w.push(Gate::X(slots.sel));
    for b in 0..slots.h {
        crate::circuit::emit_toffoli(&mut w, slots.sel, slots.data0 + b, slots.work0 + b);
    }
    if let Some(ctrl) = phase_ctrl {
        let mut s = Circuit::new(total);
        s.push(Gate::S(slots.sel));
        s.controlled_of(ctrl, &mut w);
    }
    if real_mixers {
        w.push(Gate::Ry(slots.sel, -std::f64::consts::FRAC_PI_4));
    } else {
        w.push(Gate::H(slots.sel));
    }
    w
}

fn emit_stream(out: &mut Circuit, w: &Circuit, slots: &DiagSlots, lcu: usize) {
    let wd = w.inverse_of();
    out.extend(w);
    out.push(Gate::H(lcu));
    out.push(Gate::X(lcu));
    out.push(Gate::H(slots.sel));
    out.push(Gate::Cx(lcu, slots.sel));
    out.push(Gate::H(slots.sel));
    out.push(Gate::X(lcu));
    out.extend(&wd);
    out.push(Gate::X(slots.sel));
    out.push(Gate::H(slots.sel));
    let controls: Vec<Control> = (0..slots.h).map(|b| (slots.work0 + b, false)).collect();
    let chain: Vec<usize> = (0..mcx_ancillas(slots.h))
        .map(|k| slots.scratch0 + k)
        .collect();
    emit_mcx(out, &controls, slots.sel, &chain);
    out.push(Gate::H(slots.sel));
    out.push(Gate::X(slots.sel));
    out.extend(w);
    out.push(Gate::H(slots.sel));
    out.push(Gate::Cx(lcu, slots.sel));
    out.push(Gate::H(slots.sel));
    out.extend(&wd);
    out.push(Gate::H(lcu));
    out.push(Gate::X(lcu));
    out.push(Gate::Z(lcu));
    out.push(Gate::X(lcu));
}

fn scratch_width(prep: &Circuit, h: usize) -> usize {
    (prep.n_qubits - h).max(mcx_ancillas(h))
}

/// Circuit whose `lcu`-zero block on `data` is diag(Re ψ_i)/√2, where ψ is
/// the h-qubit profile prepared by `prep` (profile qubits first, any helper
/// qubits of `prep` after them). Registers: lcu, work, sel, data, scratch.
#[must_use]
pub fn build_real_diag(prep: &Circuit, h: usize) -> Circuit {
    let s = scratch_width(prep, h);
    let total = 2 * h + 2 + s;
    let slots = DiagSlots {
        work0: 1,
        sel: h + 1,
        data0: h + 2,
        scratch0: 2 * h + 2,
        h,
    };
    let mut out = Circuit::new(total);
    out.add_register("lcu", 0, 1, RegKind::Flag);
    out.add_register("work", slots.work0, h, RegKind::Ancilla);
    out.add_register("sel", slots.sel, 1, RegKind::Ancilla);
    out.add_register("data", slots.data0, h, RegKind::Data);
    if s > 0 {
        out.add_register("scratch", slots.scratch0, s, RegKind::Ancilla);
    }
    let prep_mapped = mapped_prep(prep, &slots, total);
    let w = comparator(&prep_mapped, &slots, total, true, None);
    emit_stream(&mut out, &w, &slots, 0);
    out
}

/// Circuit whose (l2, lcu)-zero block on `data` is diag(ψ_i)/2: two phased
/// copies of the real comparator stream share one circuit, with the phase
/// slots controlled on `l2`. Registers: l2, lcu, work, sel, data, scratch.
#[must_use]
pub fn build_complex_diag(prep: &Circuit, h: usize) -> Circuit {
    let s = scratch_width(prep, h);
    let total = 2 * h + 3 + s;
    let slots = DiagSlots {
        work0: 2,
        sel: h + 2,
        data0: h + 3,
        scratch0: 2 * h + 3,
        h,
    };
    let mut out = Circuit::new(total);
    out.add_register("l2", 0, 1, RegKind::Flag);
    out.add_register("lcu", 1, 1, RegKind::Flag);
    out.add_register("work", slots.work0, h, RegKind::Ancilla);
    out.add_register("sel", slots.sel, 1, RegKind::Ancilla);
    out.add_register("data", slots.data0, h, RegKind::Data);
    if s > 0 {
        out.add_register("scratch", slots.scratch0, s, RegKind::Ancilla);
    }
    let prep_mapped = mapped_prep(prep, &slots, total);
    let w = comparator(&prep_mapped, &slots, total, false, Some(0));
    out.push(Gate::H(0));
    emit_stream(&mut out, &w, &slots, 1);
    out.push(Gate::S(0));
    out.push(Gate::H(0));
    out
}

/// Wraps [`build_real_diag`] as a block encoding with scale √2.
#[must_use]
pub fn real_diag_encoding(prep: &Circuit, h: usize) -> BlockEncoding {
    BlockEncoding {
        circuit: build_real_diag(prep, h),
        alpha: std::f64::consts::SQRT_2,
        eps: 0.0,
        data_in: vec!["data".into()],
        data_out: vec!["data".into()],
        flags: vec!["lcu".into()],
    }
}

/// Wraps [`build_complex_diag`] as a block encoding with scale 2.
#[must_use]
pub fn complex_diag_encoding(prep: &Circuit, h: usize) -> BlockEncoding {
    BlockEncoding {
        circuit: build_complex_diag(prep, h),
        alpha: 2.0,
        eps: 0.0,
        data_in: vec!["data".into()],
        data_out: vec!["data".into()],
        flags: vec!["l2".into(), "lcu".into()],
    }
}
