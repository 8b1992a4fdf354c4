//! Amplitude loading for real vectors with few-bit index support.
//!
//! Call chi the largest popcount among indices carrying a nonzero entry.
//! The loader walks qubits k = 0..n-1 (bit weight 2^k) and, at each level,
//! emits Ry rotations indexed by subsets t of the earlier bits with
//! |t| <= chi - 1; the gate for t fires on branches whose earlier bits p
//! satisfy p being a subset of t, enforced with zero-controls on the bits
//! outside t. Walking subsets by falling size, the frame angles
//!
//!   w_t = theta_t - sum_{u strictly containing t} w_u
//!
//! make the accumulated angle on branch p equal theta_p, the two-child
//! split angle of the signed magnitude tree. Branches of size chi need no
//! gate: their subtree holds a single leaf, so theta vanishes there by
//! construction, which is what keeps the inventory at |t| <= chi - 1.
//!
//! Signs ride along by orienting every split so that the subtree's first
//! nonzero leaf comes out positive, then fixing the overall sign with a
//! global phase. A final self-check folds the emitted angles back into
//! amplitudes and compares against the request.

use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::primitives::multicontrol::{emit_mc_gate, Control};

/// Failure while loading a weighted-amplitude profile.
#[derive(Error, Debug)]
pub enum PrepError {
    #[error("amplitude profile has zero norm")]
    ZeroNorm,
    #[error("loaded amplitudes deviate from the request by {dev:.3e}")]
    Reconstruction { dev: f64 },
}

/// Per-gate one-qubit allowance for i zero-controls.
#[inline]
fn allow_1q(i: usize) -> usize {
    match i {
        0 => 1,
        1 => 2,
        _ => 16 * i - 14,
    }
}

/// Per-gate CNOT allowance for i zero-controls.
#[inline]
fn allow_cx(i: usize) -> usize {
    match i {
        0 => 0,
        1 => 2,
        _ => 12 * i - 10,
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Binomial (one-qubit, CNOT) budget for loading an n-qubit profile of
/// support size chi: gates with i zero-controls exist at levels
/// k = i .. min(chi-1+i, n-1), C(k, i) of them each.
#[must_use]
pub fn prep_budget(n: usize, chi: usize) -> (usize, usize) {
    if chi == 0 {
        return (0, 0);
    }
    let mut ones = 0usize;
    let mut cnots = 0usize;
    for i in 0..n {
        let hi = (chi - 1 + i).min(n - 1);
        for k in i..=hi {
            let c = binomial(k, i);
            ones += c * allow_1q(i);
            cnots += c * allow_cx(i);
        }
    }
    (ones, cnots)
}

/// Clean ancillas [`emit_weighted_prep`] may borrow on an n-qubit register.
#[inline]
#[must_use]
pub fn prep_ancillas(n: usize) -> usize {
    if n >= 6 {
        n - 2
    } else {
        0
    }
}

fn zc_ry(out: &mut Circuit, ctrls: &[usize], target: usize, th: f64) {
    match ctrls.split_last() {
        None => out.push(Gate::Ry(target, th)),
        Some((&last, rest)) => {
            zc_ry(out, rest, target, th / 2.0);
            out.push(Gate::Cx(last, target));
            zc_ry(out, rest, target, th / 2.0);
            out.push(Gate::Cx(last, target));
        }
    }
}

fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Appends a circuit taking |0...0> on `data` to beta / ||beta||.
///
/// `data` is MSB first, so bit k of the profile index lives on
/// `data[n-1-k]`. Entries below 1e-12 of the norm are treated as exact
/// zeros. `anc` must hold [`prep_ancillas`]`(n)` clean qubits; they are
/// only touched for levels needing five or more zero-controls. Returns the
/// inferred support size chi.
pub fn emit_weighted_prep(
    out: &mut Circuit,
    data: &[usize],
    anc: &[usize],
    beta: &[f64],
) -> Result<usize, PrepError> {
    let n = data.len();
    assert_eq!(beta.len(), 1 << n, "profile length mismatch");
    let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(PrepError::ZeroNorm);
    }
    let mut b: Vec<f64> = beta
        .iter()
        .map(|&v| if v.abs() <= 1e-12 * norm { 0.0 } else { v / norm })
        .collect();
    let norm2 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm2 == 0.0 {
        return Err(PrepError::ZeroNorm);
    }
    for v in &mut b {
        *v /= norm2;
    }
    let chi = (0..1usize << n)
        .filter(|&i| b[i] != 0.0)
        .map(|i| i.count_ones() as usize)
        .max()
        .unwrap();

    let mut mag: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut first: Vec<Vec<usize>> = Vec::with_capacity(n + 1);
    mag.push(b.iter().map(|v| v.abs()).collect());
    first.push(
        (0..1usize << n)
            .map(|i| if b[i] != 0.0 { i } else { usize::MAX })
            .collect(),
    );
    for k in (0..n).rev() {
        let child_m = &mag[0];
        let child_f = &first[0];
        let m: Vec<f64> = (0..1usize << k)
            .map(|t| child_m[t].hypot(child_m[t + (1 << k)]))
            .collect();
        let f: Vec<usize> = (0..1usize << k)
            .map(|t| child_f[t].min(child_f[t + (1 << k)]))
            .collect();
        mag.insert(0, m);
        first.insert(0, f);
    }
    let sgn = |k: usize, t: usize| -> f64 {
        match first[k][t] {
            usize::MAX => 1.0,
            i => sign_of(b[i]),
        }
    };

    let root_sign = sgn(0, 0);
    let mut omegas: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for k in 0..n {
        let theta = |t: usize| -> f64 {
            if mag[k][t] == 0.0 {
                return 0.0;
            }
            let s = sgn(k, t);
            let c0 = s * sgn(k + 1, t) * mag[k + 1][t];
            let c1 = s * sgn(k + 1, t + (1 << k)) * mag[k + 1][t + (1 << k)];
            2.0 * c1.atan2(c0)
        };
        let keep = |t: usize| (t as u32).count_ones() as usize <= chi.saturating_sub(1);
        let masks: Vec<usize> = (0..1usize << k).filter(|&t| keep(t)).collect();
        let mut w = vec![0.0f64; 1 << k];
        let mut by_size = masks.clone();
        by_size.sort_by_key(|t| std::cmp::Reverse(t.count_ones()));
        for &t in &by_size {
            let mut val = theta(t);
            for &u in &masks {
                if u != t && u & t == t {
                    val -= w[u];
                }
            }
            w[t] = val;
        }
        omegas.push(masks.into_iter().map(|t| (t, w[t])).collect());
    }

    for (k, gates) in omegas.iter().enumerate() {
        let target = data[n - 1 - k];
        for &(t, w) in gates {
            if w.abs() <= 1e-14 {
                continue;
            }
            let ctrls: Vec<usize> = (0..k).filter(|j| (t >> j) & 1 == 0).map(|j| data[n - 1 - j]).collect();
            if ctrls.len() <= 4 {
                zc_ry(out, &ctrls, target, w);
            } else {
                let pattern: Vec<Control> = ctrls.iter().map(|&q| (q, false)).collect();
                emit_mc_gate(out, &pattern, Gate::Ry(target, w), anc);
            }
        }
    }
    if root_sign < 0.0 {
        out.push(Gate::GPhase(std::f64::consts::PI));
    }

    let mut dev = 0.0f64;
    for i in 0..1usize << n {
        let mut amp = root_sign;
        for (k, gates) in omegas.iter().enumerate() {
            let p = i & ((1 << k) - 1);
            let ang: f64 = gates
                .iter()
                .filter(|&&(t, w)| w.abs() > 1e-14 && p & t == p)
                .map(|&(_, w)| w)
                .sum();
            amp *= if (i >> k) & 1 == 0 {
                (ang / 2.0).cos()
            } else {
                (ang / 2.0).sin()
            };
        }
        dev = dev.max((amp - b[i]).abs());
    }
    if dev > 1e-10 {
        return Err(PrepError::Reconstruction { dev });
    }
    Ok(chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_on_basis;
    use proptest::prelude::*;

    fn loaded_state(n: usize, beta: &[f64]) -> (Vec<f64>, usize, Circuit) {
        let na = prep_ancillas(n);
        let mut c = Circuit::new(n + na);
        let data: Vec<usize> = (0..n).collect();
        let anc: Vec<usize> = (n..n + na).collect();
        let chi = emit_weighted_prep(&mut c, &data, &anc, beta).unwrap();
        let state = run_on_basis(&c, 0);
        let mut amps = vec![0.0f64; 1 << n];
        let mut worst_anc = 0.0f64;
        for (g, a) in state.iter().enumerate() {
            if g & ((1 << na) - 1) == 0 {
                amps[g >> na] = a.re;
                assert!(a.im.abs() < 1e-12);
            } else {
                worst_anc = worst_anc.max(a.norm());
            }
        }
        assert!(worst_anc < 1e-12, "ancilla leak {worst_anc}");
        (amps, chi, c)
    }

    fn normalized(beta: &[f64]) -> Vec<f64> {
        let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        beta.iter().map(|b| b / norm).collect()
    }

    #[test]
    fn single_bit_profiles_load_exactly() {
        for n in 1..=5usize {
            let mut beta = vec![0.0f64; 1 << n];
            beta[0] = 0.4;
            for j in 0..n {
                beta[1 << j] = if j % 2 == 0 { -(j as f64) - 0.5 } else { 0.3 * (j as f64 + 1.0) };
            }
            let (amps, chi, c) = loaded_state(n, &beta);
            assert_eq!(chi, 1);
            let want = normalized(&beta);
            for i in 0..1 << n {
                assert!((amps[i] - want[i]).abs() < 1e-10, "n={n} i={i}");
            }
            let (b1, bc) = prep_budget(n, chi);
            assert!(c.count_1q() <= b1 && c.count_cx() <= bc, "n={n}");
        }
    }

    #[test]
    fn leading_zero_profile_loads() {
        let beta = [0.0, -0.6, 0.8, 0.0];
        let (amps, chi, _) = loaded_state(2, &beta);
        assert_eq!(chi, 1);
        let want = normalized(&beta);
        for i in 0..4 {
            assert!((amps[i] - want[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn all_levels_active_reference_counts() {
        let n = 7;
        let mut beta = vec![0.0f64; 1 << n];
        beta[0] = 1.0;
        for j in 0..n {
            beta[1 << j] = 0.5 + 0.1 * j as f64;
        }
        let (amps, chi, c) = loaded_state(n, &beta);
        assert_eq!(chi, 1);
        let want = normalized(&beta);
        for i in 0..1 << n {
            assert!((amps[i] - want[i]).abs() < 1e-10);
        }
        assert_eq!((c.count_1q(), c.count_cx()), (201, 164));
        assert_eq!(prep_budget(7, 1), (253, 192));
        assert!(c.count_1q() <= 253 && c.count_cx() <= 192);
    }

    #[test]
    fn budget_reference_points() {
        assert_eq!(prep_budget(3, 2), (26, 20));
        assert_eq!(prep_budget(1, 1), (1, 0));
    }

    #[test]
    fn zero_profile_is_rejected() {
        let mut c = Circuit::new(2);
        let err = emit_weighted_prep(&mut c, &[0, 1], &[], &[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(err, Err(PrepError::ZeroNorm)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn arbitrary_profiles_load_within_tolerance(
            n in 1usize..=4,
            raw in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let beta: Vec<f64> = raw[..1 << n].to_vec();
            let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
            prop_assume!(norm > 0.1);
            let (amps, chi, c) = loaded_state(n, &beta);
            let clipped: Vec<f64> = beta
                .iter()
                .map(|&v| if v.abs() <= 1e-12 * norm { 0.0 } else { v })
                .collect();
            let want = normalized(&clipped);
            for i in 0..1 << n {
                prop_assert!((amps[i] - want[i]).abs() < 1e-10);
            }
            let (b1, bc) = prep_budget(n, chi);
            prop_assert!(c.count_1q() <= b1 && c.count_cx() <= bc);
        }
    }
}
