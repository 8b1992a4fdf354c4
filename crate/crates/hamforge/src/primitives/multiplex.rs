//! Uniformly controlled rotations via Gray-code CNOT cancellation.
//!
//! A multiplexed rotation applies R(theta_s) to the target when the select
//! register reads |s>. Writing g_j = j xor (j >> 1) for the Gray sequence,
//! the circuit alternates rotations R(phi_j) with CNOTs whose controls step
//! through the Gray transition bits; the CNOT suffix seen by branch s flips
//! the target sign pattern so the accumulated angle is
//!
//!   sum_j (-1)^{popcount(g_j & s)} phi_j = theta_s,
//!
//! solved exactly by phi = 2^-l A^T theta with A_{s,j} = (-1)^{popcount(g_j & s)}
//! and A A^T = 2^l I. Both Ry and Rz commute with the X-frame flips the same
//! way, so one emitter serves both axes. 2^l rotations and 2^l CNOTs.

use crate::circuit::{Circuit, Gate};

/// Rotation axis of a multiplexed rotation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RotAxis {
    Y,
    Z,
}

impl RotAxis {
    #[inline]
    fn gate(self, q: usize, angle: f64) -> Gate {
        match self {
            RotAxis::Y => Gate::Ry(q, angle),
            RotAxis::Z => Gate::Rz(q, angle),
        }
    }
}

/// Gray-frame angles phi with A phi = theta; `theta.len()` must be a power
/// of two.
#[must_use]
pub fn gray_angles(theta: &[f64]) -> Vec<f64> {
    let len = theta.len();
    assert!(len.is_power_of_two(), "angle list must be a power of two");
    let scale = 1.0 / len as f64;
    (0..len)
        .map(|j| {
            let g = j ^ (j >> 1);
            let mut acc = 0.0;
            for (s, th) in theta.iter().enumerate() {
                if (g & s).count_ones() % 2 == 0 {
                    acc += th;
                } else {
                    acc -= th;
                }
            }
            acc * scale
        })
        .collect()
}

/// Appends R(theta_s) on `target` for select value s.
///
/// `select` is MSB first and `theta` has 2^select.len() entries. When every
/// Gray-frame angle beyond the first vanishes the rotation is select
/// independent and collapses to a single gate; otherwise all CNOTs are kept
/// so the frame telescopes to identity, and only exact-zero rotations are
/// dropped.
pub fn emit_multiplexed(
    out: &mut Circuit,
    axis: RotAxis,
    select: &[usize],
    target: usize,
    theta: &[f64],
) {
    let l = select.len();
    assert_eq!(theta.len(), 1 << l, "need one angle per select value");
    if l == 0 {
        if theta[0] != 0.0 {
            out.push(axis.gate(target, theta[0]));
        }
        return;
    }
    let phi = gray_angles(theta);
    if phi[1..].iter().all(|p| p.abs() < 1e-15) {
        if phi[0].abs() >= 1e-15 {
            out.push(axis.gate(target, phi[0]));
        }
        return;
    }
    for (j, &p) in phi.iter().enumerate() {
        if p != 0.0 {
            out.push(axis.gate(target, p));
        }
        let bit = if j + 1 == 1 << l {
            l - 1
        } else {
            (j + 1).trailing_zeros() as usize
        };
        out.push(Gate::Cx(select[l - 1 - bit], target));
    }
}
