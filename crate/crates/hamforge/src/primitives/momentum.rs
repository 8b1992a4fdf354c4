//! Amplitude oracle for powers of the periodic momentum operator.
//!
//! p^m on a 2^n-point periodic grid is circulant, so its nonzero first-row
//! entries i^m (p^m)_{0,r} are real up to rounding: the oracle loads them as
//! cos(theta_s/2) amplitudes on a flag qubit, multiplexed over the band slot
//! register, and restores the phase with a global i^-m. The flag-0 block is
//! diag((p^m)_{0, r_s} / N) with N the largest entry magnitude.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::matrices::{band_offsets, p_pow};
use crate::primitives::banded::{assign_slots, SlotPlan};
use crate::primitives::multiplex::{emit_multiplexed, RotAxis};
use crate::spec_model::GridSpec;

/// Failure while realizing momentum-band amplitudes.
#[derive(Error, Debug)]
pub enum MomentumError {
    #[error("band value keeps imaginary residue {imag:.3e} after phase alignment")]
    ComplexResidual { imag: f64 },
}

/// Slot plan for the bands of p^m on `grid`.
#[must_use]
pub fn momentum_plan(grid: &GridSpec, m: usize) -> SlotPlan {
    let pm = p_pow(grid, m);
    assign_slots(grid.n, &band_offsets(&pm, 1e-14))
}

/// Real amplitudes i^m (p^m)_{0, r_s} per slot; fixed-point padding slots
/// contribute zero.
pub fn slot_values(grid: &GridSpec, m: usize, plan: &SlotPlan) -> Result<Vec<f64>, MomentumError> {
    let pm = p_pow(grid, m);
    let phase = Complex64::i().powu(m as u32);
    let mut vals = vec![0.0f64; plan.slots()];
    let mut scale = 1.0f64;
    for s in 0..plan.slots() {
        if plan.real[s] {
            let v = phase * pm[(0, plan.r[s])];
            vals[s] = v.re;
            scale = scale.max(v.norm());
        }
    }
    for s in 0..plan.slots() {
        if plan.real[s] {
            let v = phase * pm[(0, plan.r[s])];
            if v.im.abs() > 1e-12 * scale {
                return Err(MomentumError::ComplexResidual { imag: v.im.abs() });
            }
        }
    }
    Ok(vals)
}

/// Exact upper bound on the (one-qubit, CNOT) cost of
/// [`emit_momentum_oracle`] with an l-qubit slot register.
#[inline]
#[must_use]
pub fn momentum_bound(l: usize) -> (usize, usize) {
    (1 << l, 1 << l)
}

/// Appends the band-amplitude oracle on (`aflag`, `select`).
///
/// On input |0>|s> the flag-0 amplitude becomes (p^m)_{0, r_s} / N; returns
/// the scale N = max_s |(p^m)_{0, r_s}|.
pub fn emit_momentum_oracle(
    out: &mut Circuit,
    aflag: usize,
    select: &[usize],
    grid: &GridSpec,
    m: usize,
    plan: &SlotPlan,
) -> Result<f64, MomentumError> {
    assert_eq!(select.len(), plan.l);
    let vals = slot_values(grid, m, plan)?;
    let norm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let theta: Vec<f64> = vals
        .iter()
        .map(|v| 2.0 * (v / norm).clamp(-1.0, 1.0).acos())
        .collect();
    emit_multiplexed(out, RotAxis::Y, select, aflag, &theta);
    if m % 4 != 0 {
        out.push(Gate::GPhase(-std::f64::consts::PI * m as f64 / 2.0));
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_on_basis;
    use std::f64::consts::PI;

    #[test]
    fn first_power_bands_on_eight_points() {
        let grid = GridSpec { n: 3, a: -1.0, b: 1.0 };
        let plan = momentum_plan(&grid, 1);
        assert_eq!(plan.l, 1);
        assert_eq!(plan.r, vec![1, 7]);
        let vals = slot_values(&grid, 1, &plan).unwrap();
        let c = 0.5 / grid.dx();
        assert!((vals[0] - c).abs() < 1e-12 && (vals[1] + c).abs() < 1e-12);
        let mut circ = Circuit::new(2);
        let norm = emit_momentum_oracle(&mut circ, 0, &[1], &grid, 1, &plan).unwrap();
        assert!((norm - c).abs() < 1e-12);
        assert_eq!((circ.count_1q(), circ.count_cx()), (2, 2));
        let (ones, cnots) = momentum_bound(plan.l);
        assert!(circ.count_1q() <= ones && circ.count_cx() <= cnots);
    }

    #[test]
    fn block_reproduces_first_row_entries() {
        for (n, m) in [(3usize, 1usize), (2, 2), (3, 2), (2, 1)] {
            let grid = GridSpec { n, a: -1.0, b: 0.75 };
            let plan = momentum_plan(&grid, m);
            let pm = p_pow(&grid, m);
            let mut circ = Circuit::new(1 + plan.l);
            let select: Vec<usize> = (1..1 + plan.l).collect();
            let norm = emit_momentum_oracle(&mut circ, 0, &select, &grid, m, &plan).unwrap();
            for s in 0..plan.slots() {
                let state = run_on_basis(&circ, s);
                let want = pm[(0, plan.r[s])] / norm * f64::from(u8::from(plan.real[s]));
                assert!(
                    (state[s] - want).norm() < 1e-12,
                    "n={n} m={m} s={s} got={} want={want}",
                    state[s]
                );
            }
        }
    }

    #[test]
    fn zeroth_power_is_empty_identity() {
        let grid = GridSpec { n: 2, a: -1.0, b: 1.0 };
        let plan = momentum_plan(&grid, 0);
        assert_eq!(plan.l, 0);
        let mut circ = Circuit::new(1);
        let norm = emit_momentum_oracle(&mut circ, 0, &[], &grid, 0, &plan).unwrap();
        assert!((norm - 1.0).abs() < 1e-15);
        assert_eq!(circ.gates.len(), 0);
    }

    #[test]
    fn gray_frame_angles_for_first_power() {
        let grid = GridSpec { n: 3, a: -1.0, b: 1.0 };
        let plan = momentum_plan(&grid, 1);
        let vals = slot_values(&grid, 1, &plan).unwrap();
        let norm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let theta: Vec<f64> = vals.iter().map(|v| 2.0 * (v / norm).acos()).collect();
        assert!((theta[0] - 0.0).abs() < 1e-12 && (theta[1] - 2.0 * PI).abs() < 1e-12);
        let phi = crate::primitives::multiplex::gray_angles(&theta);
        assert!((phi[0] - PI).abs() < 1e-12 && (phi[1] + PI).abs() < 1e-12);
    }
}
