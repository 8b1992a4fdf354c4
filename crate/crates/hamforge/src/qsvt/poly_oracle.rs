//! Coordinate amplitude oracles and entrywise polynomial blocks.
//!
//! [`build_x_encoding`] loads the coordinate grid x_0..x_{2^n-1} through a
//! Walsh-profile preparation and a diagonal comparator, giving a block
//! encoding of diag(x_i) with scale √2·‖x‖₂. [`build_poly_oracle`] then
//! alternates that oracle with phase rotations so the flagged block becomes
//! diag(P(x_i))/c_P for a definite-parity polynomial P, where c_P bounds
//! |P| on the rescaled domain. Both phase branches of the real-part trick
//! share a single oracle stream: a flip qubit conjugates every phase
//! rotation, so the two conjugate phase sequences ride on the same
//! applications of the oracle.

use thiserror::Error;

use crate::circuit::{Circuit, Gate, RegKind};
use crate::matrices::{walsh_coefficients, x_diag};
use crate::primitives::binary_norm::{emit_weighted_prep, prep_ancillas, PrepError};
use crate::qsvt::diag_be::{build_real_diag, real_diag_encoding};
use crate::qsvt::phases::{eval_qsp, solve_phases, PhaseError};
use crate::sim::BlockEncoding;
use crate::spec_model::{poly_degree, GridSpec};

/// Errors from oracle construction.
#[derive(Error, Debug)]
pub enum PolyOracleError {
    #[error("coordinate profile failed to load: {0}")]
    Prep(#[from] PrepError),
    #[error("phase finding failed: {0}")]
    Phase(#[from] PhaseError),
}

/// Coordinate loader: prepares x/‖x‖₂ on `n` qubits (profile first, helper
/// qubits after) and reports ‖x‖₂.
pub fn build_x_prep(grid: &GridSpec) -> Result<(Circuit, f64), PolyOracleError> {
    let xs = x_diag(grid);
    let n_x = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let beta = walsh_coefficients(&xs);
    let n = grid.n;
    let extra = prep_ancillas(n);
    let mut c = Circuit::new(n + extra);
    let data: Vec<usize> = (0..n).collect();
    let anc: Vec<usize> = (n..n + extra).collect();
    emit_weighted_prep(&mut c, &data, &anc, &beta)?;
    for q in 0..n {
        c.push(Gate::H(q));
    }
    Ok((c, n_x))
}

/// Block encoding of diag(x_i) with scale √2·‖x‖₂ and one flag qubit.
pub fn build_x_encoding(grid: &GridSpec) -> Result<BlockEncoding, PolyOracleError> {
    let (prep, n_x) = build_x_prep(grid)?;
    let mut be = real_diag_encoding(&prep, grid.n);
    be.alpha *= n_x;
    Ok(be)
}

/// Ceiling constant: sup |P| over [-wmax, wmax] on a dense scan, padded so
/// the rescaled target stays strictly inside [-1, 1].
#[must_use]
pub fn poly_ceiling(coeffs: &[f64], wmax: f64) -> f64 {
    const POINTS: usize = 200_001;
    let mut sup: f64 = 0.0;
    for t in 0..POINTS {
        let w = wmax * (2.0 * t as f64 / (POINTS - 1) as f64 - 1.0);
        let v = coeffs.iter().rev().fold(0.0, |acc, &c| acc * w + c);
        sup = sup.max(v.abs());
    }
    if sup == 0.0 {
        return 1.0;
    }
    sup / (1.0 - 1e-8)
}

/// Polynomial oracle: circuit block diag(P(x_i))/c_P, plus the pieces used
/// to build it.
pub struct PolyOracle {
    pub encoding: BlockEncoding,
    /// Scale constant: block = diag(P(x_i))/c_P.
    pub c_p: f64,
    /// l2 norm of the coordinate values.
    pub n_x: f64,
    /// Solved phases (empty for constant polynomials).
    pub phases: Vec<f64>,
}

/// Builds the entrywise-polynomial block encoding over the grid. `coeffs`
/// are monomial coefficients of P, constant term first, with definite
/// parity. Degree-0 polynomials compile to a single rotation on the flip
/// qubit; otherwise the solved phase list has exactly degree entries.
pub fn build_poly_oracle(
    grid: &GridSpec,
    coeffs: &[f64],
) -> Result<PolyOracle, PolyOracleError> {
    let n = grid.n;
    let (prep, n_x) = build_x_prep(grid)?;
    let wmax = std::f64::consts::SQRT_2 * n_x;
    let c_p = poly_ceiling(coeffs, wmax);
    let q = poly_degree(coeffs);

    let diag = build_real_diag(&prep, n);
    let total = diag.n_qubits + 1;
    let mut circuit = Circuit::new(total);
    circuit.add_register("wq", 0, 1, RegKind::Flag);
    for reg in &diag.regs {
        let kind = match reg.name.as_str() {
            "lcu" => RegKind::Flag,
            "data" => RegKind::Data,
            _ => RegKind::Ancilla,
        };
        circuit.add_register(&reg.name, reg.start + 1, reg.width, kind);
    }
    let dmap: Vec<usize> = (1..=diag.n_qubits).collect();
    let lcu = 1;

    let mut phases = Vec::new();
    let mut eps = 0.0;
    if q == 0 {
        let ratio = (coeffs.first().copied().unwrap_or(0.0) / c_p).clamp(-1.0, 1.0);
        circuit.push(Gate::Ry(0, 2.0 * ratio.acos()));
    } else {
        let target: Vec<f64> = (0..=q)
            .map(|k| coeffs[k] * wmax.powi(k as i32) / c_p)
            .collect();
        let seq = solve_phases(&target)?;
        phases = seq.phis;
        let diag_inv = diag.inverse_of();
        circuit.push(Gate::H(0));
        for j in 1..=q {
            let app = if j % 2 == 1 { &diag } else { &diag_inv };
            circuit.extend_mapped(app, &dmap);
            let phi = phases[q - j];
            circuit.push(Gate::Cx(0, lcu));
            circuit.push(Gate::Rz(lcu, -2.0 * phi));
            circuit.push(Gate::Cx(0, lcu));
        }
        circuit.push(Gate::H(0));
        let mut dense_dev: f64 = 0.0;
        for t in 0..=2000 {
            let z = -1.0 + t as f64 / 1000.0;
            let want = target.iter().rev().fold(0.0, |acc, &c| acc * z + c);
            dense_dev = dense_dev.max((eval_qsp(&phases, z).re - want).abs());
        }
        eps = c_p * dense_dev;
    }

    Ok(PolyOracle {
        encoding: BlockEncoding {
            circuit,
            alpha: c_p,
            eps,
            data_in: vec!["data".into()],
            data_out: vec!["data".into()],
            flags: vec!["wq".into(), "lcu".into()],
        },
        c_p,
        n_x,
        phases,
    })
}
