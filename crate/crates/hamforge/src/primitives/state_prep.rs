//! Dense complex amplitude loading.
//!
//! Magnitudes load through one multiplexed Ry per qubit: level k rotates
//! qubit k (bit weight 2^k) by the two-child split angles of the magnitude
//! tree, selected on the k earlier bits. Phases then load through one
//! multiplexed Rz per qubit, walked from the top bit down: each level
//! applies the phase difference of its two children and passes the mean
//! upward, so the residue after the last level is a global phase, emitted
//! as such. Everything is exact up to rounding; no ancillas are used.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::primitives::multiplex::{emit_multiplexed, RotAxis};

/// Appends a circuit taking |0...0> on `data` to amps / ||amps||.
///
/// `data` is MSB first; bit k of the amplitude index lives on
/// `data[n-1-k]`. The profile must have nonzero norm.
pub fn emit_state_prep(out: &mut Circuit, data: &[usize], amps: &[Complex64]) {
    let n = data.len();
    assert_eq!(amps.len(), 1 << n, "profile length mismatch");
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "profile has zero norm");

    let mut mag: Vec<Vec<f64>> = vec![amps.iter().map(|a| a.norm() / norm).collect()];
    for k in (0..n).rev() {
        let child = &mag[0];
        let m: Vec<f64> = (0..1usize << k)
            .map(|p| child[p].hypot(child[p + (1 << k)]))
            .collect();
        mag.insert(0, m);
    }
    for k in 0..n {
        let theta: Vec<f64> = (0..1usize << k)
            .map(|p| {
                if mag[k][p] == 0.0 {
                    0.0
                } else {
                    2.0 * mag[k + 1][p + (1 << k)].atan2(mag[k + 1][p])
                }
            })
            .collect();
        let select: Vec<usize> = (0..k).rev().map(|j| data[n - 1 - j]).collect();
        emit_multiplexed(out, RotAxis::Y, &select, data[n - 1 - k], &theta);
    }

    let mut phases: Vec<f64> = amps.iter().map(|a| if a.norm() == 0.0 { 0.0 } else { a.arg() }).collect();
    for k in (0..n).rev() {
        let half = 1usize << k;
        let delta: Vec<f64> = (0..half).map(|p| phases[p + half] - phases[p]).collect();
        let select: Vec<usize> = (0..k).rev().map(|j| data[n - 1 - j]).collect();
        emit_multiplexed(out, RotAxis::Z, &select, data[n - 1 - k], &delta);
        phases = (0..half).map(|p| 0.5 * (phases[p] + phases[p + half])).collect();
    }
    if phases[0] != 0.0 {
        out.push(Gate::GPhase(phases[0]));
    }
}
