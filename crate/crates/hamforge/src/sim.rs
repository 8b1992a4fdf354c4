//! Dense state-vector simulation and block extraction.
//!
//! Basis indices are read MSB-first: flat qubit 0 is the highest bit of the
//! state index, so a ket written |q0 q1 ... q_{N-1}> maps to the integer
//! q0·2^{N-1} + ... + q_{N-1}. A cx with control 0 and target 1 therefore
//! sends index 2 (|10>) to index 3 (|11>).
//!
//! [`extract_block`] turns a [`BlockEncoding`] descriptor into the dense
//! flagged block by simulating one basis column per input index, and reports
//! the worst ancilla-leak amplitude seen inside the flag-zero sector.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};

/// Errors raised during simulation or block verification.
#[derive(Error, Debug)]
pub enum SimError {
    #[error("qubit {qubit} out of range for {n_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("ancilla leak {leak:.3e} exceeds tolerance {tol:.3e} on basis input {input}")]
    AncillaLeak { leak: f64, tol: f64, input: usize },
    #[error("block deviates from target by {dev:.3e} (tolerance {tol:.3e})")]
    BlockMismatch { dev: f64, tol: f64 },
    #[error("descriptor register {0} missing from circuit")]
    MissingRegister(String),
}

/// Block-encoding descriptor: which registers carry data in and out, which
/// must flag |0>, and the scale relating the flagged block to the target.
///
/// Register name lists are MSB-first: the first named register holds the
/// most significant bits of the data index. Registers declared with
/// [`RegKind::Ancilla`], and any input register absent from `data_out`, must
/// return to |0> inside the flag-zero sector.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub circuit: Circuit,
    /// Sub-normalization: target = alpha * flagged block (up to eps).
    pub alpha: f64,
    /// Construction error bound promised by the builder.
    pub eps: f64,
    pub data_in: Vec<String>,
    pub data_out: Vec<String>,
    pub flags: Vec<String>,
}

impl BlockEncoding {
    /// Total width of the named register list, in qubits.
    pub fn width_of(&self, names: &[String]) -> Result<usize, SimError> {
        let mut w = 0;
        for name in names {
            w += self
                .circuit
                .register(name)
                .map_err(|_| SimError::MissingRegister(name.clone()))?
                .width;
        }
        Ok(w)
    }

    fn flat_qubits(&self, names: &[String]) -> Result<Vec<usize>, SimError> {
        let mut out = Vec::new();
        for name in names {
            let reg = self
                .circuit
                .register(name)
                .map_err(|_| SimError::MissingRegister(name.clone()))?;
            out.extend(reg.qubits());
        }
        Ok(out)
    }
}

/// Result of [`extract_block`]: the dense flagged block and the worst
/// flag-zero-sector amplitude found outside it on pure registers.
pub struct ExtractedBlock {
    pub matrix: nalgebra::DMatrix<Complex64>,
    pub max_leak: f64,
}

enum Op {
    One(usize, [[Complex64; 2]; 2]),
    Cx(usize, usize),
    Scale(Complex64),
}

/// Collapses runs of one-qubit gates on the same qubit into single 2x2
/// applications and folds global phases into one scalar.
fn fuse(circuit: &Circuit) -> Vec<Op> {
    let mut ops = Vec::with_capacity(circuit.gates.len());
    let mut pending: std::collections::BTreeMap<usize, [[Complex64; 2]; 2]> =
        std::collections::BTreeMap::new();
    let mut scale = Complex64::new(1.0, 0.0);
    let flush =
        |q: usize, pending: &mut std::collections::BTreeMap<usize, [[Complex64; 2]; 2]>,
         ops: &mut Vec<Op>| {
            if let Some(m) = pending.remove(&q) {
                ops.push(Op::One(q, m));
            }
        };
    for g in &circuit.gates {
        match *g {
            Gate::Cx(c, t) => {
                flush(c, &mut pending, &mut ops);
                flush(t, &mut pending, &mut ops);
                ops.push(Op::Cx(c, t));
            }
            Gate::GPhase(th) => {
                scale *= (Complex64::i() * th).exp();
            }
            ref g1 => {
                let q = g1.support().next().expect("one-qubit gate");
                let m = g1.matrix().expect("one-qubit gate");
                let cur = pending.entry(q).or_insert([
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                ]);
                let mut next = [[Complex64::new(0.0, 0.0); 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        next[r][c] = m[r][0] * cur[0][c] + m[r][1] * cur[1][c];
                    }
                }
                *cur = next;
            }
        }
    }
    let keys: Vec<usize> = pending.keys().copied().collect();
    for q in keys {
        flush(q, &mut pending, &mut ops);
    }
    if scale != Complex64::new(1.0, 0.0) {
        ops.push(Op::Scale(scale));
    }
    ops
}

#[inline]
fn apply_one(state: &mut [Complex64], n: usize, q: usize, m: &[[Complex64; 2]; 2]) {
    let w = 1usize << (n - 1 - q);
    let dim = state.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + w {
            let i1 = i0 + w;
            let a = state[i0];
            let b = state[i1];
            state[i0] = m[0][0] * a + m[0][1] * b;
            state[i1] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * w;
    }
}

#[inline]
fn apply_cx(state: &mut [Complex64], n: usize, c: usize, t: usize) {
    let wc = 1usize << (n - 1 - c);
    let wt = 1usize << (n - 1 - t);
    let (w1, w2) = if wc < wt { (wc, wt) } else { (wt, wc) };
    let dim = state.len();
    let mut a = 0;
    while a < dim {
        let mut b = a;
        while b < a + w2 {
            for base in b..b + w1 {
                let i = base + wc;
                state.swap(i, i + wt);
            }
            b += 2 * w1;
        }
        a += 2 * w2;
    }
}

fn apply_ops(state: &mut [Complex64], n: usize, ops: &[Op]) {
    for op in ops {
        match op {
            Op::One(q, m) => apply_one(state, n, *q, m),
            Op::Cx(c, t) => apply_cx(state, n, *c, *t),
            Op::Scale(s) => {
                for amp in state.iter_mut() {
                    *amp *= s;
                }
            }
        }
    }
}

/// Applies `circuit` to `state` in place; `state` must have length 2^n.
pub fn apply_circuit(circuit: &Circuit, state: &mut [Complex64]) {
    assert_eq!(state.len(), 1usize << circuit.n_qubits);
    let ops = fuse(circuit);
    apply_ops(state, circuit.n_qubits, &ops);
}

/// Width at which per-column simulation switches from a dense vector to the
/// sparse amplitude map. Circuits this wide arise from re-indexed encodings
/// whose support stays far below 2^n; moderately wide circuits with dense
/// support simulate faster through the flat vector.
const SPARSE_THRESHOLD: usize = 16;

/// Amplitudes below this magnitude are dropped from sparse states. Each gate
/// discards at most a handful of such entries, so the accumulated l2 drift
/// stays orders of magnitude under every verification tolerance.
const SPARSE_PRUNE_SQ: f64 = 1e-34;

#[derive(Default)]
struct KeyHash(u64);

impl std::hash::Hasher for KeyHash {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ u64::from(b)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
    #[inline]
    fn write_usize(&mut self, k: usize) {
        self.0 = (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.0 ^= self.0 >> 29;
    }
}

#[derive(Clone, Copy, Default)]
struct KeyHashBuilder;

impl std::hash::BuildHasher for KeyHashBuilder {
    type Hasher = KeyHash;
    fn build_hasher(&self) -> KeyHash {
        KeyHash::default()
    }
}

type SparseState = std::collections::HashMap<usize, Complex64, KeyHashBuilder>;

fn sparse_apply_one(state: &mut SparseState, n: usize, q: usize, m: &[[Complex64; 2]; 2]) {
    let mask = 1usize << (n - 1 - q);
    let off = m[0][1].norm_sqr() + m[1][0].norm_sqr();
    if off == 0.0 {
        for (k, v) in state.iter_mut() {
            *v *= if k & mask == 0 { m[0][0] } else { m[1][1] };
        }
        return;
    }
    if m[0][0].norm_sqr() + m[1][1].norm_sqr() == 0.0 {
        let old = std::mem::take(state);
        state.reserve(old.len());
        for (k, v) in old {
            let fac = if k & mask == 0 { m[1][0] } else { m[0][1] };
            state.insert(k ^ mask, fac * v);
        }
        return;
    }
    let old = std::mem::take(state);
    state.reserve(old.len() * 2);
    let zero = Complex64::new(0.0, 0.0);
    for (&k, &v) in &old {
        let (a, b) = if k & mask == 0 {
            (v, old.get(&(k | mask)).copied().unwrap_or(zero))
        } else if old.contains_key(&(k ^ mask)) {
            continue;
        } else {
            (zero, v)
        };
        let base = k & !mask;
        let c0 = m[0][0] * a + m[0][1] * b;
        let c1 = m[1][0] * a + m[1][1] * b;
        if c0.norm_sqr() > SPARSE_PRUNE_SQ {
            state.insert(base, c0);
        }
        if c1.norm_sqr() > SPARSE_PRUNE_SQ {
            state.insert(base | mask, c1);
        }
    }
}

fn sparse_apply_ops(state: &mut SparseState, n: usize, ops: &[Op]) {
    for op in ops {
        match op {
            Op::One(q, m) => sparse_apply_one(state, n, *q, m),
            Op::Cx(c, t) => {
                let cm = 1usize << (n - 1 - *c);
                let tm = 1usize << (n - 1 - *t);
                let old = std::mem::take(state);
                state.reserve(old.len());
                for (k, v) in old {
                    state.insert(if k & cm != 0 { k ^ tm } else { k }, v);
                }
            }
            Op::Scale(s) => {
                for v in state.values_mut() {
                    *v *= s;
                }
            }
        }
    }
}

/// Simulates `circuit` on basis state `index`, tracking only nonzero
/// amplitudes. Returns the final (index, amplitude) pairs in no particular
/// order. Suited to circuits whose intermediate states stay far sparser than
/// the full Hilbert space dimension.
pub fn run_on_basis_sparse(circuit: &Circuit, index: usize) -> Vec<(usize, Complex64)> {
    let ops = fuse(circuit);
    let mut state = SparseState::default();
    state.insert(index, Complex64::new(1.0, 0.0));
    sparse_apply_ops(&mut state, circuit.n_qubits, &ops);
    state.into_iter().collect()
}

/// Simulates `circuit` on the computational basis state `index`.
pub fn run_on_basis(circuit: &Circuit, index: usize) -> Vec<Complex64> {
    let dim = 1usize << circuit.n_qubits;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    state[index] = Complex64::new(1.0, 0.0);
    apply_circuit(circuit, &mut state);
    state
}

/// Dense unitary of a small circuit, one simulated column per basis state.
pub fn unitary_of(circuit: &Circuit) -> nalgebra::DMatrix<Complex64> {
    let dim = 1usize << circuit.n_qubits;
    let mut u = nalgebra::DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let state = run_on_basis(circuit, col);
        for row in 0..dim {
            u[(row, col)] = state[row];
        }
    }
    u
}

/// Largest singular value.
pub fn spectral_norm(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var("HAMFORGE_THREADS") {
            if let Ok(k) = v.parse::<usize>() {
                if k >= 1 {
                    builder = builder.num_threads(k);
                }
            }
        }
        builder.build().expect("thread pool")
    })
}

/// Simulates every data-input basis column of `be` and reads off the
/// flagged block: entry (j, i) is the output amplitude with `data_out` = j
/// and every other qubit 0, given input `data_in` = i and all else 0.
///
/// The returned leak is the worst per-column l2 amplitude inside the
/// flag-zero sector on qubits that should have returned to |0>. Circuits
/// with no flag registers are checked over the whole state.
pub fn extract_block(be: &BlockEncoding) -> Result<ExtractedBlock, SimError> {
    let n = be.circuit.n_qubits;
    for reg in &be.circuit.regs {
        if reg.start + reg.width > n {
            return Err(SimError::QubitOutOfRange {
                qubit: reg.start + reg.width - 1,
                n_qubits: n,
            });
        }
    }
    let in_qubits = be.flat_qubits(&be.data_in)?;
    let out_qubits = be.flat_qubits(&be.data_out)?;
    let flag_qubits = be.flat_qubits(&be.flags)?;
    let dim = 1usize << n;
    let weight = |q: usize| 1usize << (n - 1 - q);
    let flag_mask: usize = flag_qubits.iter().map(|&q| weight(q)).sum();
    let out_mask: usize = out_qubits.iter().map(|&q| weight(q)).sum();
    let pure_mask = !(flag_mask | out_mask) & (dim - 1);

    let n_in = 1usize << in_qubits.len();
    let n_out = 1usize << out_qubits.len();
    let ops = fuse(&be.circuit);

    let read_entry = |g: usize,
                      amp: Complex64,
                      col: &mut Vec<Complex64>,
                      leak_sq: &mut f64| {
        if g & flag_mask != 0 {
            return;
        }
        if g & pure_mask != 0 {
            *leak_sq += amp.norm_sqr();
            return;
        }
        let mut j = 0usize;
        for &q in &out_qubits {
            j = (j << 1) | ((g >> (n - 1 - q)) & 1);
        }
        col[j] += amp;
    };

    let columns: Vec<(Vec<Complex64>, f64)> = thread_pool().install(|| {
        (0..n_in)
            .into_par_iter()
            .map(|i| {
                let mut index = 0usize;
                for (pos, &q) in in_qubits.iter().enumerate() {
                    if (i >> (in_qubits.len() - 1 - pos)) & 1 == 1 {
                        index |= weight(q);
                    }
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n_out];
                let mut leak_sq = 0.0;
                if n >= SPARSE_THRESHOLD {
                    let mut state = SparseState::default();
                    state.insert(index, Complex64::new(1.0, 0.0));
                    sparse_apply_ops(&mut state, n, &ops);
                    for (g, amp) in state {
                        read_entry(g, amp, &mut col, &mut leak_sq);
                    }
                } else {
                    let mut state = vec![Complex64::new(0.0, 0.0); dim];
                    state[index] = Complex64::new(1.0, 0.0);
                    apply_ops(&mut state, n, &ops);
                    for (g, &amp) in state.iter().enumerate() {
                        read_entry(g, amp, &mut col, &mut leak_sq);
                    }
                }
                (col, leak_sq.sqrt())
            })
            .collect()
    });

    let mut matrix = nalgebra::DMatrix::zeros(n_out, n_in);
    let mut max_leak: f64 = 0.0;
    for (i, (col, leak)) in columns.iter().enumerate() {
        for (j, amp) in col.iter().enumerate() {
            matrix[(j, i)] = *amp;
        }
        max_leak = max_leak.max(*leak);
    }
    Ok(ExtractedBlock { matrix, max_leak })
}

/// Checks `target ~= alpha * block` in spectral norm and that ancilla leak
/// stays below `leak_tol`.
pub fn assert_block_equals(
    be: &BlockEncoding,
    target: &nalgebra::DMatrix<Complex64>,
    tol: f64,
    leak_tol: f64,
) -> Result<f64, SimError> {
    let extracted = extract_block(be)?;
    if extracted.max_leak > leak_tol {
        return Err(SimError::AncillaLeak {
            leak: extracted.max_leak,
            tol: leak_tol,
            input: 0,
        });
    }
    let scaled = extracted.matrix.map(|v| v * Complex64::new(be.alpha, 0.0));
    let dev = spectral_norm(&(target - scaled));
    if dev > tol {
        return Err(SimError::BlockMismatch { dev, tol });
    }
    Ok(dev)
}

/// Pure-ancilla audit over every basis input of the full circuit: ancilla
/// registers must return to |0> whenever they start there, inside the
/// flag-zero sector when flags exist.
pub fn max_ancilla_leak(be: &BlockEncoding) -> Result<f64, SimError> {
    Ok(extract_block(be)?.max_leak)
}
