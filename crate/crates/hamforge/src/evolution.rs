//! Time evolution circuits built from the square Hamiltonian encoding.
//!
//! For H encoded as the flag-zero block of U_H over alpha_H, the propagator
//! splits as e^{itH} = cos(tH) + i sin(tH). Both halves truncate through the
//! Jacobi-Anger expansion at order g,
//!
//! ```text
//!     cos(zx) ~ J_0(z) + 2 sum_k (-1)^k J_{2k}(z)   T_{2k}(x)
//!     sin(zx) ~        2 sum_k (-1)^k J_{2k+1}(z) T_{2k+1}(x)
//! ```
//!
//! with z = t alpha_H, and g is the smallest order whose tail bound
//! (1.07/sqrt(g)) (z e / 2g)^g clears the requested tolerance. Each half is
//! realized by phased alternation of U_H and its inverse; a swap of the row
//! and column registers after every application makes the encoding square on
//! the column register, so either parity lands back where it started. The
//! phase reflections mark the good subspace with one multi-controlled flip,
//! a real-part qubit conjugates the phases to strip the unfitted imaginary
//! component, and a final one-qubit sum leaves (cos + i sin)/(2c) on the
//! all-zero flag sector, c being the sup normalization of the truncated
//! pair.

use thiserror::Error;

use crate::assembly::{build_u_h, AssemblyError};
use crate::circuit::{Circuit, CircuitError, Gate, RegKind};
use crate::primitives::multicontrol::{emit_mcx, mcx_ancillas, Control};
use crate::primitives::multiplex::{emit_multiplexed, RotAxis};
use crate::qsvt::phases::{solve_phases, PhaseError};
use crate::sim::BlockEncoding;
use crate::spec_model::HamiltonianSpec;

#[derive(Error, Debug)]
pub enum EvolutionError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Jacobi-Anger tail bound (1.07/sqrt(g)) (z e / 2g)^g at order g >= 1.
#[inline]
#[must_use]
pub fn truncation_bound(z: f64, g: usize) -> f64 {
    let gf = g as f64;
    (1.07 / gf.sqrt()) * (z.abs() * std::f64::consts::E / (2.0 * gf)).powi(g as i32)
}

/// Smallest truncation order whose tail bound clears eps; 0 when z = 0.
#[must_use]
pub fn required_order(z: f64, eps: f64) -> usize {
    if z == 0.0 {
        return 0;
    }
    let mut g = 1;
    while truncation_bound(z, g) > eps {
        g += 1;
        assert!(g < 10_000, "truncation order diverged");
    }
    g
}

/// Bessel function of the first kind by its power series.
#[must_use]
pub fn bessel_j(k: usize, z: f64) -> f64 {
    let half = z / 2.0;
    let mut term = 1.0;
    for i in 1..=k {
        term *= half / i as f64;
    }
    let mut sum = term;
    for j in 1..=220usize {
        term *= -(half * half) / (j as f64 * (j + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum
}

/// Monomial coefficients of the order-g truncations of cos(zx) and sin(zx).
fn jacobi_anger(z: f64, g: usize) -> (Vec<f64>, Vec<f64>) {
    let q_e = 2 * (g / 2);
    let q_o = 2 * ((g + 1) / 2) - 1;
    let mut chebs: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 1.0]];
    for k in 2..=g {
        let mut t = vec![0.0; k + 1];
        for (i, v) in chebs[k - 1].iter().enumerate() {
            t[i + 1] += 2.0 * v;
        }
        for (i, v) in chebs[k - 2].iter().enumerate() {
            t[i] -= v;
        }
        chebs.push(t);
    }
    let mut ce = vec![0.0; q_e + 1];
    ce[0] = bessel_j(0, z);
    for k in (2..=g).step_by(2) {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let w = 2.0 * sign * bessel_j(k, z);
        for (i, v) in chebs[k].iter().enumerate() {
            ce[i] += w * v;
        }
    }
    let mut so = vec![0.0; q_o + 1];
    for k in (1..=g).step_by(2) {
        let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let w = 2.0 * sign * bessel_j(k, z);
        for (i, v) in chebs[k].iter().enumerate() {
            so[i] += w * v;
        }
    }
    (ce, so)
}

fn sup_abs(p: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for t in 0..=20_000 {
        let x = -1.0 + t as f64 / 10_000.0;
        let v = p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        sup = sup.max(v.abs());
    }
    sup
}

/// Total qubits the propagator circuit will occupy, from the declared
/// shape alone.
pub fn planned_qubits(spec: &HamiltonianSpec) -> Result<usize, crate::spec_model::SpecError> {
    let shape = crate::assembly::planned_shape(spec)?;
    let controls = shape.coeff_width + 3 * shape.dims + shape.n_sum;
    Ok(shape.total + 3 + controls.saturating_sub(2))
}

/// A compiled propagator encoding: 2c times the flag-zero block is e^{itH}
/// up to the Jacobi-Anger tail and the phase fit residuals.
pub struct EvolutionBuild {
    pub be: BlockEncoding,
    /// Truncation order from the inequality scan.
    pub g: usize,
    /// Applications of the square encoding or its inverse in the circuit.
    pub queries: usize,
    /// Sup normalization of the truncated polynomial pair; alpha = 2c.
    pub c: f64,
    /// Scale of the underlying square encoding.
    pub alpha_h: f64,
    /// Tail bound at the implemented order.
    pub bound: f64,
    /// Band-count exponent of the underlying square encoding.
    pub l_h: usize,
    /// Coefficient-register width exponent of the underlying encoding.
    pub gamma: usize,
}

/// Compiles e^{itH} for the Hamiltonian of `spec` to accuracy `eps`.
pub fn build_evolution(
    spec: &HamiltonianSpec,
    t: f64,
    eps: f64,
) -> Result<EvolutionBuild, EvolutionError> {
    if !(eps > 0.0) {
        return Err(EvolutionError::BadTolerance(eps));
    }
    let grids = spec.grids();
    let d = grids.len();
    let uh = build_u_h(spec)?;
    let base = &uh.be.circuit;
    let un = base.n_qubits;
    let suffix = |s: usize| if d == 1 { String::new() } else { s.to_string() };

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(d);
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(d);
    for s in 0..d {
        rows.push(base.register(&format!("row{}", suffix(s)))?.qubits().collect());
        let mut cv = Vec::new();
        if let Ok(r) = base.register(&format!("colhi{}", suffix(s))) {
            cv.extend(r.qubits());
        }
        if let Ok(r) = base.register(&format!("collo{}", suffix(s))) {
            cv.extend(r.qubits());
        }
        cols.push(cv);
    }

    // Good-subspace indicator: every non-column register reads zero. The
    // toffoli chain gets its own register; the internal ancillas of the
    // square encoding are only clean in the flag-zero sector, and the phase
    // kicks must act exactly on the flagged branches too.
    let mut zero_q: Vec<usize> = Vec::new();
    if let Ok(r) = base.register("coeff") {
        zero_q.extend(r.qubits());
    }
    for s in 0..d {
        for nm in ["aflag", "wq", "lcu"] {
            zero_q.extend(base.register(&format!("{nm}{}", suffix(s)))?.qubits());
        }
    }
    for r in &rows {
        zero_q.extend(r.iter().copied());
    }
    let need = mcx_ancillas(zero_q.len());

    let total = un + 3 + need;
    let elcu = un;
    let ewq = un + 1;
    let panc = un + 2;
    let chain_q: Vec<usize> = (un + 3..total).collect();

    let mut circ = Circuit::new(total);
    for r in &base.regs {
        circ.add_register(&r.name, r.start, r.width, r.kind);
    }
    circ.add_register("elcu", elcu, 1, RegKind::Flag);
    circ.add_register("ewq", ewq, 1, RegKind::Flag);
    circ.add_register("panc", panc, 1, RegKind::Ancilla);
    if need > 0 {
        circ.add_register("chain", un + 3, need, RegKind::Ancilla);
    }

    let mut flags: Vec<String> = uh
        .be
        .flags
        .iter()
        .filter(|f| !f.starts_with("collo"))
        .cloned()
        .collect();
    flags.extend((0..d).map(|s| format!("row{}", suffix(s))));
    flags.push("elcu".into());
    flags.push("ewq".into());
    let data = uh.be.data_in.clone();

    let alpha_h = uh.be.alpha;
    let z = t * alpha_h;
    let g = required_order(z, eps);
    if t == 0.0 {
        circ.push(Gate::Ry(elcu, 2.0 * 0.5f64.acos()));
        return Ok(EvolutionBuild {
            be: BlockEncoding {
                circuit: circ,
                alpha: 2.0,
                eps: 0.0,
                data_in: data.clone(),
                data_out: data,
                flags,
            },
            g: 0,
            queries: 0,
            c: 1.0,
            alpha_h,
            l_h: uh.l_h,
            gamma: uh.gamma,
            bound: 0.0,
        });
    }

    // Degree-0 cosine truncations have no phase sequence; order 2 is the
    // smallest that carries both parities.
    let g_eff = g.max(2);
    let (ce, so) = jacobi_anger(z, g_eff);
    let c_norm = sup_abs(&ce).max(sup_abs(&so)) / (1.0 - 1e-8);
    let te: Vec<f64> = ce.iter().map(|v| v / c_norm).collect();
    let to: Vec<f64> = so.iter().map(|v| v / c_norm).collect();
    let pe = solve_phases(&te)?;
    let po = solve_phases(&to)?;
    let q_e = pe.phis.len();
    let q_o = po.phis.len();
    let q_max = q_e.max(q_o);
    let q_min = q_e.min(q_o);
    let odd_is_long = q_o > q_e;

    let mut step = Circuit::new(total);
    step.extend(base);
    for s in 0..d {
        for k in 0..grids[s].n {
            let (a, b) = (rows[s][k], cols[s][k]);
            step.push(Gate::Cx(a, b));
            step.push(Gate::Cx(b, a));
            step.push(Gate::Cx(a, b));
        }
    }
    let step_dag = step.inverse_of();

    let controls: Vec<Control> = zero_q.iter().map(|&q| (q, false)).collect();
    let chain = &chain_q[..];
    let phase_op = |out: &mut Circuit, th0: f64, th1: f64| {
        emit_mcx(out, &controls, panc, chain);
        out.push(Gate::Cx(ewq, panc));
        emit_multiplexed(out, RotAxis::Z, &[elcu], panc, &[th0, th1]);
        out.push(Gate::Cx(ewq, panc));
        emit_mcx(out, &controls, panc, chain);
    };

    circ.push(Gate::H(elcu));
    circ.push(Gate::H(ewq));
    for j in 1..=q_max {
        let app = if j % 2 == 1 { &step } else { &step_dag };
        if j <= q_min {
            circ.extend(app);
        } else if odd_is_long {
            app.controlled_of(elcu, &mut circ);
        } else {
            circ.push(Gate::X(elcu));
            app.controlled_of(elcu, &mut circ);
            circ.push(Gate::X(elcu));
        }
        let th0 = if j <= q_e { 2.0 * pe.phis[q_e - j] } else { 0.0 };
        let th1 = if j <= q_o { 2.0 * po.phis[q_o - j] } else { 0.0 };
        phase_op(&mut circ, th0, th1);
    }
    circ.push(Gate::H(ewq));
    circ.push(Gate::S(elcu));
    circ.push(Gate::H(elcu));

    let bound = truncation_bound(z, g_eff);
    let eps_total = 2.0 * bound + (pe.residual + po.residual) * c_norm + uh.be.eps * t.abs();
    Ok(EvolutionBuild {
        be: BlockEncoding {
            circuit: circ,
            alpha: 2.0 * c_norm,
            eps: eps_total,
            data_in: data.clone(),
            data_out: data,
            flags,
        },
        g,
        queries: q_max,
        c: c_norm,
        alpha_h,
        l_h: uh.l_h,
        gamma: uh.gamma,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{dense_hamiltonian, expm};
    use crate::sim::{extract_block, spectral_norm};
    use num_complex::Complex64;
    use crate::spec_model::{GridSpec, TermSpec};

    fn xp_spec() -> HamiltonianSpec {
        HamiltonianSpec {
            grid: GridSpec { n: 2, a: -1.0, b: 1.0 },
            terms: Some(vec![TermSpec {
                alpha: [0.5, 0.0],
                poly: vec![0.0, 0.5],
                m: 1,
            }]),
            dims: None,
            multi_terms: None,
        }
    }

    #[test]
    fn bessel_values_match_references() {
        assert!((bessel_j(0, 1.0) - 0.7651976865579666).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.4400505857449335).abs() < 1e-15);
        assert!((bessel_j(3, 2.5) - 0.21660039103911352).abs() < 1e-14);
    }

    #[test]
    fn order_scan_matches_pinned_points() {
        assert_eq!(required_order(1.0, 1e-3), 5);
        let b5 = truncation_bound(1.0, 5);
        assert!(b5 > 7.0e-4 && b5 < 7.2e-4, "bound at order 5: {b5}");
        assert!(truncation_bound(1.0, 4) > 1e-3);
        assert_eq!(required_order(0.0, 1e-3), 0);
    }

    #[test]
    fn truncations_track_the_trigonometric_pair() {
        let z = 1.3;
        let g = 6;
        let (ce, so) = jacobi_anger(z, g);
        for (i, v) in ce.iter().enumerate() {
            if i % 2 == 1 {
                assert_eq!(*v, 0.0);
            }
        }
        let mut dev = 0.0f64;
        for t in 0..=400 {
            let x = -1.0 + t as f64 / 200.0;
            let c = ce.iter().rev().fold(0.0, |acc, &v| acc * x + v);
            let s = so.iter().rev().fold(0.0, |acc, &v| acc * x + v);
            dev = dev.max((c - (z * x).cos()).abs());
            dev = dev.max((s - (z * x).sin()).abs());
        }
        assert!(dev <= truncation_bound(z, g), "tail {dev}");
    }

    #[test]
    fn zero_time_encodes_the_identity() {
        let spec = xp_spec();
        let ev = build_evolution(&spec, 0.0, 1e-3).unwrap();
        assert_eq!(ev.g, 0);
        assert_eq!(ev.queries, 0);
        let b = extract_block(&ev.be).unwrap();
        let n = b.matrix.nrows();
        let id = nalgebra::DMatrix::<Complex64>::identity(n, n);
        let dev = spectral_norm(&(&b.matrix * Complex64::new(2.0, 0.0) - id));
        assert!(dev < 1e-12, "identity deviation {dev}");
        assert!(b.max_leak < 1e-12);
    }

    #[test]
    fn propagator_block_tracks_matrix_exponential() {
        let spec = xp_spec();
        let h = dense_hamiltonian(&spec).unwrap();
        let uh_alpha = {
            let uh = build_u_h(&spec).unwrap();
            uh.be.alpha
        };
        let t = 0.5 / uh_alpha;
        let eps = 0.1;
        let ev = build_evolution(&spec, t, eps).unwrap();
        assert_eq!(ev.g, required_order(0.5, eps));
        assert_eq!(ev.be.circuit.n_qubits, planned_qubits(&spec).unwrap());
        let b = extract_block(&ev.be).unwrap();
        assert!(b.max_leak < 1e-10, "ancilla leak {}", b.max_leak);
        let target = expm(&(h * Complex64::new(0.0, t)));
        let dev = spectral_norm(&(&target - &b.matrix * Complex64::new(2.0, 0.0)));
        assert!(dev <= eps, "propagator deviation {dev} > {eps}");
        assert!(
            dev <= 2.0 * ev.bound + 1e-6,
            "deviation {dev} above tail budget {}",
            2.0 * ev.bound
        );
    }
}
