//! Assembly of Hamiltonian terms into explicit block encodings.
//!
//! A one-mode term contributes alpha P(x) p^m + conj(alpha) p^m P(x); each
//! half compiles to the same primitive chain over (row, col) registers,
//!
//! ```text
//!     H^(x)l   uniform slot superposition on the low row bits
//!     O^S      band amplitudes of p^m onto the amplitude flag
//!     O^BS     banded shift  row <- r_s + col
//!     O_P      diagonal polynomial factor on row (P p^m) or col (p^m P)
//! ```
//!
//! so the flag-zero block of one chain is (-1)^m (P p^m)_{ji} respectively
//! (-1)^m (p^m P)_{ji} over the scale 2^{l/2} N_{p^m} c_P. Branches are
//! summed through a coefficient register: a preparation with amplitudes u_k,
//! one chain per basis pattern, and the transposed preparation to close,
//! which leaves sum_k u_k^2 B_k on the all-zero flag sector. Squaring the
//! result, the column register is pulled back through the inverse banded
//! shift of the full Hamiltonian and a Hadamard layer on the slot bits, so
//! input and output live on the same register width and the scale picks up
//! another 2^{l_H/2}.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{emit_toffoli, Circuit, Gate, RegKind};
use crate::matrices::dense_hamiltonian;
use crate::primitives::banded::{assign_slots, ceil_log2, emit_banded_oracle, SlotPlan};
use crate::primitives::momentum::{
    emit_momentum_oracle, momentum_plan, slot_values, MomentumError,
};
use crate::primitives::state_prep::emit_state_prep;
use crate::qsvt::poly_oracle::{build_poly_oracle, PolyOracle, PolyOracleError};
use crate::sim::BlockEncoding;
use crate::spec_model::{GridSpec, HamiltonianSpec, SpecError, TermSpec};

#[derive(Error, Debug)]
pub enum AssemblyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Poly(#[from] PolyOracleError),
    #[error(transparent)]
    Momentum(#[from] MomentumError),
    #[error("every term weight vanishes")]
    ZeroWeights,
}

/// Which side of the momentum power the polynomial factor multiplies on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FactorOrder {
    /// P(x) p^m: the polynomial reads the output (row) index.
    PolyLeft,
    /// p^m P(x): the polynomial reads the input (col) index.
    PolyRight,
}

/// One compiled factor: momentum band plan plus polynomial oracle.
struct FactorPlan {
    grid: GridSpec,
    m: usize,
    order: FactorOrder,
    plan: SlotPlan,
    oracle: PolyOracle,
    /// Factor scale 2^{l/2} N_{p^m} c_P.
    nn: f64,
}

struct BranchPlan {
    weight: Complex64,
    factors: Vec<FactorPlan>,
}

impl BranchPlan {
    fn sign(&self) -> f64 {
        let m: usize = self.factors.iter().map(|f| f.m).sum();
        if m % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn nn(&self) -> f64 {
        self.factors.iter().map(|f| f.nn).product()
    }

    /// Relative polynomial fit error accumulated over the factors.
    fn rel_dev(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.oracle.encoding.eps / f.oracle.c_p)
            .sum()
    }
}

struct AssemblyPlan {
    grids: Vec<GridSpec>,
    /// One entry per coefficient-register pattern; None = empty slot.
    slots: Vec<Option<BranchPlan>>,
    coeff_width: usize,
    gamma: usize,
    n_h: f64,
    /// Absolute error bound on the encoded operator.
    eps: f64,
}

/// Qubit positions of one dimension's registers.
struct DimQubits {
    aflag: usize,
    row: Vec<usize>,
    wq: usize,
    lcu: usize,
    col: Vec<usize>,
}

struct Layout {
    coeff: Vec<usize>,
    dims: Vec<DimQubits>,
    work: Vec<usize>,
    sel: usize,
    scratch: Vec<usize>,
    fold: Vec<usize>,
}

fn suffix(d: usize, sigma: usize) -> String {
    if d == 1 {
        String::new()
    } else {
        sigma.to_string()
    }
}

fn factor_plan(
    grid: &GridSpec,
    coeffs: &[f64],
    m: usize,
    order: FactorOrder,
) -> Result<FactorPlan, AssemblyError> {
    let plan = momentum_plan(grid, m);
    let vals = slot_values(grid, m, &plan)?;
    let n_pm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let oracle = build_poly_oracle(grid, coeffs)?;
    let nn = ((1u64 << plan.l) as f64).sqrt() * n_pm * oracle.c_p;
    Ok(FactorPlan {
        grid: *grid,
        m,
        order,
        plan,
        oracle,
        nn,
    })
}

fn plan_of(spec: &HamiltonianSpec) -> Result<AssemblyPlan, AssemblyError> {
    spec.validate()?;
    let grids = spec.grids();
    let (coeff_width, gamma, mut slots) = if let Some(terms) = &spec.terms {
        let gamma = ceil_log2(terms.len());
        let mut slots: Vec<Option<BranchPlan>> = (0..2usize << gamma).map(|_| None).collect();
        for (k, t) in terms.iter().enumerate() {
            let alpha = Complex64::new(t.alpha[0], t.alpha[1]);
            if alpha.norm() == 0.0 {
                continue;
            }
            slots[k] = Some(BranchPlan {
                weight: alpha,
                factors: vec![factor_plan(&grids[0], &t.poly, t.m, FactorOrder::PolyLeft)?],
            });
            slots[k + (1 << gamma)] = Some(BranchPlan {
                weight: alpha.conj(),
                factors: vec![factor_plan(&grids[0], &t.poly, t.m, FactorOrder::PolyRight)?],
            });
        }
        (gamma + 1, gamma, slots)
    } else {
        let terms = spec.multi_terms.as_ref().expect("validated");
        let gamma = ceil_log2(terms.len());
        let mut slots: Vec<Option<BranchPlan>> = (0..1usize << gamma).map(|_| None).collect();
        for (k, t) in terms.iter().enumerate() {
            let weight = Complex64::new(t.alpha[0], t.alpha[1]);
            if weight.norm() == 0.0 {
                continue;
            }
            let mut factors = Vec::with_capacity(t.factors.len());
            for (sigma, f) in t.factors.iter().enumerate() {
                let order = if f.l == 0 {
                    FactorOrder::PolyLeft
                } else {
                    FactorOrder::PolyRight
                };
                factors.push(factor_plan(&grids[sigma], &f.poly, f.m, order)?);
            }
            slots[k] = Some(BranchPlan { weight, factors });
        }
        (gamma, gamma, slots)
    };
    let n_h: f64 = slots
        .iter()
        .flatten()
        .map(|b| b.weight.norm() * b.nn())
        .sum();
    if n_h <= 0.0 {
        return Err(AssemblyError::ZeroWeights);
    }
    let eps: f64 = slots
        .iter()
        .flatten()
        .map(|b| b.weight.norm() * b.nn() * b.rel_dev())
        .sum();
    // Slots whose branch dropped to zero weight should not stay half-filled.
    for s in slots.iter_mut() {
        if let Some(b) = s {
            if b.weight.norm() == 0.0 {
                *s = None;
            }
        }
    }
    Ok(AssemblyPlan {
        grids,
        slots,
        coeff_width,
        gamma,
        n_h,
        eps,
    })
}

/// Register widths of the planned encoding, readable from the declared
/// shape alone.
#[derive(Clone, Copy, Debug)]
pub struct PlannedShape {
    /// Total qubits of the square encoding.
    pub total: usize,
    /// Coefficient register width.
    pub coeff_width: usize,
    /// Sum of coordinate register widths.
    pub n_sum: usize,
    /// Widest coordinate register.
    pub n_max: usize,
    /// Number of dimensions.
    pub dims: usize,
}

/// Computes the square encoding's register shape without constructing
/// anything, so oversized specs can be refused up front.
pub fn planned_shape(spec: &HamiltonianSpec) -> Result<PlannedShape, SpecError> {
    spec.validate()?;
    let grids = spec.grids();
    let coeff_width = match &spec.terms {
        Some(t) => ceil_log2(t.len()) + 1,
        None => ceil_log2(spec.multi_terms.as_ref().expect("validated").len()),
    };
    let n_max = grids.iter().map(|g| g.n).max().expect("dims");
    let n_sum: usize = grids.iter().map(|g| g.n).sum();
    let total = coeff_width
        + grids.iter().map(|g| 2 * g.n + 3).sum::<usize>()
        + n_max
        + 1
        + (n_max - 1)
        + coeff_width.saturating_sub(1);
    Ok(PlannedShape {
        total,
        coeff_width,
        n_sum,
        n_max,
        dims: grids.len(),
    })
}

/// Total qubits the square encoding will occupy.
pub fn planned_qubits(spec: &HamiltonianSpec) -> Result<usize, SpecError> {
    Ok(planned_shape(spec)?.total)
}

fn reg(c: &mut Circuit, cursor: &mut usize, name: &str, width: usize, kind: RegKind) -> Vec<usize> {
    if width == 0 {
        return Vec::new();
    }
    c.add_register(name, *cursor, width, kind);
    let v: Vec<usize> = (*cursor..*cursor + width).collect();
    *cursor += width;
    v
}

fn build_layout(plan: &AssemblyPlan, split: Option<&[usize]>) -> (Circuit, Layout) {
    let d = plan.grids.len();
    let n_max = plan.grids.iter().map(|g| g.n).max().expect("dims");
    let inner = n_max - 1;
    let fold_w = plan.coeff_width.saturating_sub(1);
    let total = plan.coeff_width
        + plan.grids.iter().map(|g| 2 * g.n + 3).sum::<usize>()
        + n_max
        + 1
        + inner
        + fold_w;
    let mut c = Circuit::new(total);
    let mut cur = 0;
    let coeff = reg(&mut c, &mut cur, "coeff", plan.coeff_width, RegKind::Flag);
    let mut dims = Vec::with_capacity(d);
    for (sigma, g) in plan.grids.iter().enumerate() {
        let suf = suffix(d, sigma);
        let aflag = reg(&mut c, &mut cur, &format!("aflag{suf}"), 1, RegKind::Flag)[0];
        let row = reg(&mut c, &mut cur, &format!("row{suf}"), g.n, RegKind::Data);
        let wq = reg(&mut c, &mut cur, &format!("wq{suf}"), 1, RegKind::Flag)[0];
        let lcu = reg(&mut c, &mut cur, &format!("lcu{suf}"), 1, RegKind::Flag)[0];
        let col = match split {
            None => reg(&mut c, &mut cur, &format!("col{suf}"), g.n, RegKind::Data),
            Some(ls) => {
                let l = ls[sigma];
                let mut hi = reg(
                    &mut c,
                    &mut cur,
                    &format!("colhi{suf}"),
                    g.n - l,
                    RegKind::Data,
                );
                let lo = reg(&mut c, &mut cur, &format!("collo{suf}"), l, RegKind::Flag);
                hi.extend(lo);
                hi
            }
        };
        dims.push(DimQubits {
            aflag,
            row,
            wq,
            lcu,
            col,
        });
    }
    let work = reg(&mut c, &mut cur, "work", n_max, RegKind::Ancilla);
    let sel = reg(&mut c, &mut cur, "sel", 1, RegKind::Ancilla)[0];
    let both = reg(&mut c, &mut cur, "scratch", inner + fold_w, RegKind::Ancilla);
    debug_assert_eq!(cur, total);
    let layout = Layout {
        coeff,
        dims,
        work,
        sel,
        scratch: both[..inner].to_vec(),
        fold: both[inner..].to_vec(),
    };
    (c, layout)
}

/// Splices the polynomial oracle onto one dimension's registers, reading the
/// diagonal from `data`.
fn embed_poly(out: &mut Circuit, layout: &Layout, sigma: usize, oracle: &PolyOracle, data: &[usize]) {
    let c = &oracle.encoding.circuit;
    let dq = &layout.dims[sigma];
    let mut map = vec![usize::MAX; c.n_qubits];
    for r in &c.regs {
        let target: Vec<usize> = match r.name.as_str() {
            "wq" => vec![dq.wq],
            "lcu" => vec![dq.lcu],
            "work" => layout.work[..r.width].to_vec(),
            "sel" => vec![layout.sel],
            "data" => data.to_vec(),
            "scratch" => layout.scratch[..r.width].to_vec(),
            other => unreachable!("unexpected oracle register {other}"),
        };
        debug_assert_eq!(target.len(), r.width);
        for (k, q) in r.qubits().enumerate() {
            map[q] = target[k];
        }
    }
    debug_assert!(map.iter().all(|&q| q != usize::MAX));
    out.extend_mapped(c, &map);
}

fn emit_branch(out: &mut Circuit, layout: &Layout, branch: &BranchPlan) -> Result<(), AssemblyError> {
    debug_assert_eq!(branch.factors.len(), layout.dims.len());
    for (sigma, f) in branch.factors.iter().enumerate() {
        let dq = &layout.dims[sigma];
        let n = f.grid.n;
        let low = &dq.row[n - f.plan.l..];
        for &q in low {
            out.push(Gate::H(q));
        }
        if f.order == FactorOrder::PolyRight {
            embed_poly(out, layout, sigma, &f.oracle, &dq.col);
        }
        emit_momentum_oracle(out, dq.aflag, low, &f.grid, f.m, &f.plan)?;
        emit_banded_oracle(out, &dq.row, &dq.col, &f.plan, &layout.scratch[..n - 1]);
        if f.order == FactorOrder::PolyLeft {
            embed_poly(out, layout, sigma, &f.oracle, &dq.row);
        }
    }
    Ok(())
}

/// Applies `inner` controlled on the coefficient register matching pattern
/// `k` (most significant coefficient bit first).
fn emit_selected(out: &mut Circuit, layout: &Layout, k: usize, inner: &Circuit) {
    let w = layout.coeff.len();
    if w == 0 {
        out.extend(inner);
        return;
    }
    let zeros: Vec<usize> = (0..w)
        .filter(|j| (k >> (w - 1 - j)) & 1 == 0)
        .map(|j| layout.coeff[j])
        .collect();
    for &q in &zeros {
        out.push(Gate::X(q));
    }
    if w == 1 {
        inner.controlled_of(layout.coeff[0], out);
    } else {
        let mut fold = Circuit::new(out.n_qubits);
        emit_toffoli(&mut fold, layout.coeff[0], layout.coeff[1], layout.fold[0]);
        for j in 2..w {
            emit_toffoli(&mut fold, layout.coeff[j], layout.fold[j - 2], layout.fold[j - 1]);
        }
        out.extend(&fold);
        inner.controlled_of(layout.fold[w - 2], out);
        out.extend(&fold.inverse_of());
    }
    for &q in &zeros {
        out.push(Gate::X(q));
    }
}

/// Prepares the coefficient register with u_k = sqrt of the normalized
/// branch weight; returns the transposed fragment that closes the sum.
fn emit_weights(out: &mut Circuit, layout: &Layout, plan: &AssemblyPlan) -> Circuit {
    if layout.coeff.is_empty() {
        let b = plan.slots[0].as_ref().expect("nonzero weight");
        let u2 = b.weight * b.sign() * (b.nn() / plan.n_h);
        if u2.arg() != 0.0 {
            out.push(Gate::GPhase(u2.arg()));
        }
        return Circuit::new(out.n_qubits);
    }
    let amps: Vec<Complex64> = plan
        .slots
        .iter()
        .map(|s| match s {
            Some(b) => (b.weight * b.sign() * (b.nn() / plan.n_h)).sqrt(),
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    let mut frag = Circuit::new(out.n_qubits);
    emit_state_prep(&mut frag, &layout.coeff, &amps);
    out.extend(&frag);
    frag.transpose_of()
}

fn assemble(
    spec: &HamiltonianSpec,
    split: Option<&[usize]>,
) -> Result<(Circuit, Layout, AssemblyPlan), AssemblyError> {
    let plan = plan_of(spec)?;
    let (mut circuit, layout) = build_layout(&plan, split);
    let close = emit_weights(&mut circuit, &layout, &plan);
    for (k, slot) in plan.slots.iter().enumerate() {
        if let Some(branch) = slot {
            let mut inner = Circuit::new(circuit.n_qubits);
            emit_branch(&mut inner, &layout, branch)?;
            emit_selected(&mut circuit, &layout, k, &inner);
        }
    }
    circuit.extend(&close);
    Ok((circuit, layout, plan))
}

/// A single compiled term chain: block = (-1)^m (P p^m or p^m P) / scale.
pub struct OneTermEncoding {
    pub be: BlockEncoding,
    /// Scale 2^{l/2} N_{p^m} c_P; the declared alpha.
    pub nn: f64,
}

/// Compiles one term chain on its own, ignoring the term weight.
pub fn build_one_term(
    grid: &GridSpec,
    term: &TermSpec,
    order: FactorOrder,
) -> Result<OneTermEncoding, AssemblyError> {
    grid.validate()?;
    let f = factor_plan(grid, &term.poly, term.m, order)?;
    let nn = f.nn;
    let eps = nn * (f.oracle.encoding.eps / f.oracle.c_p);
    let plan = AssemblyPlan {
        grids: vec![*grid],
        slots: vec![Some(BranchPlan {
            weight: Complex64::new(1.0, 0.0),
            factors: vec![f],
        })],
        coeff_width: 0,
        gamma: 0,
        n_h: nn,
        eps,
    };
    let (mut circuit, layout) = build_layout(&plan, None);
    emit_branch(
        &mut circuit,
        &layout,
        plan.slots[0].as_ref().expect("one branch"),
    )?;
    Ok(OneTermEncoding {
        be: BlockEncoding {
            circuit,
            alpha: nn,
            eps,
            data_in: vec!["col".into()],
            data_out: vec!["row".into(), "col".into()],
            flags: vec!["aflag".into(), "wq".into(), "lcu".into()],
        },
        nn,
    })
}

/// The rectangular summed encoding: block (j, i', i) = delta_{i'i} H_{ji} / N_H.
pub struct SummedEncoding {
    pub be: BlockEncoding,
    pub n_h: f64,
    pub coeff_width: usize,
}

/// Compiles the weighted sum of all term chains over a doubled index space.
pub fn build_a_h(spec: &HamiltonianSpec) -> Result<SummedEncoding, AssemblyError> {
    let (circuit, _layout, plan) = assemble(spec, None)?;
    let d = plan.grids.len();
    let mut flags: Vec<String> = Vec::new();
    if plan.coeff_width > 0 {
        flags.push("coeff".into());
    }
    for sigma in 0..d {
        let suf = suffix(d, sigma);
        flags.push(format!("aflag{suf}"));
        flags.push(format!("wq{suf}"));
        flags.push(format!("lcu{suf}"));
    }
    let data_in: Vec<String> = (0..d).map(|s| format!("col{}", suffix(d, s))).collect();
    let mut data_out: Vec<String> = (0..d).map(|s| format!("row{}", suffix(d, s))).collect();
    data_out.extend(data_in.iter().cloned());
    Ok(SummedEncoding {
        be: BlockEncoding {
            circuit,
            alpha: plan.n_h,
            eps: plan.eps,
            data_in,
            data_out,
            flags,
        },
        n_h: plan.n_h,
        coeff_width: plan.coeff_width,
    })
}

/// The square flagged encoding: block = H / (2^{l_H/2} N_H).
pub struct FlaggedEncoding {
    pub be: BlockEncoding,
    pub n_h: f64,
    /// Total slot bits of the Hamiltonian band structure.
    pub l_h: usize,
    pub gamma: usize,
    pub coeff_width: usize,
    /// Number of flag qubits.
    pub flag_width: usize,
}

/// Compiles the square encoding whose flag-zero block is the Hamiltonian
/// over 2^{l_H/2} N_H.
pub fn build_u_h(spec: &HamiltonianSpec) -> Result<FlaggedEncoding, AssemblyError> {
    spec.validate()?;
    let dense = dense_hamiltonian(spec)?;
    let grids = spec.grids();
    let d = grids.len();
    let sizes: Vec<usize> = grids.iter().map(|g| 1usize << g.n).collect();
    let mut offs: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); d];
    for r in 0..dense.nrows() {
        for c in 0..dense.ncols() {
            if dense[(r, c)].norm() > 1e-14 {
                let (mut rr, mut cc) = (r, c);
                for sigma in (0..d).rev() {
                    let nsz = sizes[sigma];
                    offs[sigma].insert((cc % nsz + nsz - rr % nsz) % nsz);
                    rr /= nsz;
                    cc /= nsz;
                }
            }
        }
    }
    let plans: Vec<SlotPlan> = grids
        .iter()
        .zip(&offs)
        .map(|(g, o)| {
            let list: Vec<usize> = o.iter().copied().collect();
            assign_slots(g.n, &list)
        })
        .collect();
    let ls: Vec<usize> = plans.iter().map(|p| p.l).collect();
    let l_h: usize = ls.iter().sum();

    let (mut circuit, layout, plan) = assemble(spec, Some(&ls))?;
    for (sigma, ph) in plans.iter().enumerate() {
        let dq = &layout.dims[sigma];
        let n = grids[sigma].n;
        let mut frag = Circuit::new(circuit.n_qubits);
        emit_banded_oracle(&mut frag, &dq.col, &dq.row, ph, &layout.scratch[..n - 1]);
        circuit.extend(&frag.inverse_of());
    }
    for (sigma, ph) in plans.iter().enumerate() {
        let dq = &layout.dims[sigma];
        let n = grids[sigma].n;
        for &q in &dq.col[n - ph.l..] {
            circuit.push(Gate::H(q));
        }
    }

    let mut flags: Vec<String> = Vec::new();
    if plan.coeff_width > 0 {
        flags.push("coeff".into());
    }
    for sigma in 0..d {
        let suf = suffix(d, sigma);
        flags.push(format!("aflag{suf}"));
        flags.push(format!("wq{suf}"));
        flags.push(format!("lcu{suf}"));
    }
    let mut data_in: Vec<String> = Vec::new();
    for sigma in 0..d {
        let suf = suffix(d, sigma);
        if grids[sigma].n > ls[sigma] {
            data_in.push(format!("colhi{suf}"));
        }
        if ls[sigma] > 0 {
            data_in.push(format!("collo{suf}"));
            flags.push(format!("collo{suf}"));
        }
    }
    let data_out: Vec<String> = (0..d).map(|s| format!("row{}", suffix(d, s))).collect();
    let flag_width = plan.coeff_width + 3 * d + l_h;
    Ok(FlaggedEncoding {
        be: BlockEncoding {
            circuit,
            alpha: 2f64.powi(l_h as i32).sqrt() * plan.n_h,
            eps: plan.eps,
            data_in,
            data_out,
            flags,
        },
        n_h: plan.n_h,
        l_h,
        gamma: plan.gamma,
        coeff_width: plan.coeff_width,
        flag_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::dense_factor;
    use crate::sim::{assert_block_equals, extract_block};
    use crate::spec_model::FactorSpec;
    use nalgebra::DMatrix;

    type CMat = DMatrix<Complex64>;

    fn rect_target(m: &CMat) -> CMat {
        let n = m.nrows();
        let mut t = DMatrix::zeros(n * n, n);
        for j in 0..n {
            for i in 0..n {
                t[(j * n + i, i)] = m[(j, i)];
            }
        }
        t
    }

    fn one_mode(n: usize, terms: Vec<TermSpec>) -> HamiltonianSpec {
        HamiltonianSpec {
            grid: GridSpec { n, a: -1.0, b: 1.0 },
            terms: Some(terms),
            dims: None,
            multi_terms: None,
        }
    }

    #[test]
    fn one_term_chain_matches_dense_factor() {
        let grid = GridSpec { n: 2, a: -1.0, b: 1.0 };
        let term = TermSpec {
            alpha: [1.0, 0.0],
            poly: vec![0.0, 0.5],
            m: 1,
        };
        for (order, l) in [(FactorOrder::PolyLeft, 0), (FactorOrder::PolyRight, 1)] {
            let ot = build_one_term(&grid, &term, order).unwrap();
            let f = FactorSpec {
                l,
                poly: term.poly.clone(),
                m: term.m,
            };
            let target = rect_target(&(dense_factor(&grid, &f) * Complex64::new(-1.0, 0.0)));
            assert_block_equals(&ot.be, &target, 1e-9, 1e-10);
        }
    }

    #[test]
    fn one_term_chain_handles_even_momentum_power() {
        let grid = GridSpec { n: 3, a: -1.0, b: 1.0 };
        let term = TermSpec {
            alpha: [1.0, 0.0],
            poly: vec![0.25, 0.0, 0.5],
            m: 2,
        };
        let ot = build_one_term(&grid, &term, FactorOrder::PolyLeft).unwrap();
        let f = FactorSpec {
            l: 0,
            poly: term.poly.clone(),
            m: 2,
        };
        let target = rect_target(&dense_factor(&grid, &f));
        assert_block_equals(&ot.be, &target, 1e-9, 1e-10);
    }

    #[test]
    fn summed_encoding_matches_scaled_hamiltonian() {
        let spec = one_mode(
            2,
            vec![
                TermSpec {
                    alpha: [0.4, 0.3],
                    poly: vec![0.0, 0.5],
                    m: 1,
                },
                TermSpec {
                    alpha: [-0.2, 0.1],
                    poly: vec![0.25, 0.0, 0.5],
                    m: 0,
                },
            ],
        );
        let h = dense_hamiltonian(&spec).unwrap();
        let ah = build_a_h(&spec).unwrap();
        assert_eq!(ah.coeff_width, 2);
        assert_block_equals(&ah.be, &rect_target(&h), 1e-9, 1e-10);
    }

    #[test]
    fn flagged_encoding_matches_hamiltonian() {
        let spec = one_mode(
            2,
            vec![TermSpec {
                alpha: [0.4, 0.3],
                poly: vec![0.0, 0.5],
                m: 1,
            }],
        );
        let h = dense_hamiltonian(&spec).unwrap();
        let uh = build_u_h(&spec).unwrap();
        assert_eq!(uh.flag_width, uh.l_h + uh.gamma + 4);
        assert_eq!(uh.be.circuit.n_qubits, planned_qubits(&spec).unwrap());
        assert_eq!(
            uh.be.width_of(&uh.be.flags).unwrap(),
            uh.flag_width,
            "flag register widths"
        );
        assert_block_equals(&uh.be, &h, 1e-9, 1e-10);
    }

    #[test]
    fn paired_multi_terms_match_one_mode_encoding() {
        let poly = vec![0.0, 0.5];
        let spec1 = one_mode(
            2,
            vec![TermSpec {
                alpha: [0.3, -0.2],
                poly: poly.clone(),
                m: 1,
            }],
        );
        let spec2 = HamiltonianSpec {
            grid: GridSpec { n: 2, a: -1.0, b: 1.0 },
            terms: None,
            dims: Some(vec![GridSpec { n: 2, a: -1.0, b: 1.0 }]),
            multi_terms: Some(vec![
                crate::spec_model::MultiTermSpec {
                    alpha: [0.3, -0.2],
                    factors: vec![FactorSpec {
                        l: 0,
                        poly: poly.clone(),
                        m: 1,
                    }],
                },
                crate::spec_model::MultiTermSpec {
                    alpha: [0.3, 0.2],
                    factors: vec![FactorSpec {
                        l: 1,
                        poly: poly.clone(),
                        m: 1,
                    }],
                },
            ]),
        };
        let u1 = build_u_h(&spec1).unwrap();
        let u2 = build_u_h(&spec2).unwrap();
        assert!((u1.be.alpha - u2.be.alpha).abs() < 1e-12 * u1.be.alpha);
        let b1 = extract_block(&u1.be).unwrap();
        let b2 = extract_block(&u2.be).unwrap();
        let dev = (&b1.matrix - &b2.matrix)
            .iter()
            .fold(0.0f64, |a, e| a.max(e.norm()));
        assert!(dev < 1e-10, "encodings differ by {dev}");
    }

    #[test]
    fn two_dimensional_encoding_matches_kron_product() {
        let g = GridSpec { n: 2, a: -1.0, b: 1.0 };
        let spec = HamiltonianSpec {
            grid: g,
            terms: None,
            dims: Some(vec![g, g]),
            multi_terms: Some(vec![crate::spec_model::MultiTermSpec {
                alpha: [0.5, 0.0],
                factors: vec![
                    FactorSpec {
                        l: 0,
                        poly: vec![0.0, 0.75],
                        m: 0,
                    },
                    FactorSpec {
                        l: 0,
                        poly: vec![0.5],
                        m: 2,
                    },
                ],
            }]),
        };
        let h = dense_hamiltonian(&spec).unwrap();
        let uh = build_u_h(&spec).unwrap();
        assert_eq!(uh.flag_width, uh.l_h + uh.gamma + 6);
        assert_eq!(uh.be.circuit.n_qubits, planned_qubits(&spec).unwrap());
        assert_block_equals(&uh.be, &h, 1e-9, 1e-10);
    }

    #[test]
    fn invalid_polynomial_is_rejected() {
        let spec = one_mode(
            2,
            vec![TermSpec {
                alpha: [1.0, 0.0],
                poly: vec![0.0, 2.0],
                m: 1,
            }],
        );
        assert!(matches!(
            build_u_h(&spec),
            Err(AssemblyError::Spec(SpecError::PolyOutOfRange { .. }))
        ));
    }
}
