//! Dense reference matrices built directly from their definitions.
//!
//! Everything here is assembled entrywise with ordinary linear algebra, so the
//! circuit pipeline can be verified against an independent construction path:
//! x̂ = diag(a + i Δx), the periodic central-difference momentum
//! p̂ = (-i/2Δx)(S - S†) with S the cyclic down-shift, polynomial and power
//! combinations of both, Kronecker assembly for several dimensions, Walsh
//! spectra of diagonal profiles, and a scaling-and-squaring exponential.

use num_complex::Complex64;

use crate::spec_model::{poly_eval, FactorSpec, GridSpec, HamiltonianSpec, SpecError};

type CMat = nalgebra::DMatrix<Complex64>;

/// Diagonal of the coordinate operator on the grid.
#[must_use]
pub fn x_diag(grid: &GridSpec) -> Vec<f64> {
    (0..grid.points()).map(|i| grid.x(i)).collect()
}

/// Coordinate operator x̂ as a dense matrix.
#[must_use]
pub fn x_hat(grid: &GridSpec) -> CMat {
    let d = x_diag(grid);
    CMat::from_fn(d.len(), d.len(), |r, c| {
        if r == c {
            Complex64::new(d[r], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Periodic central-difference momentum operator p̂.
///
/// Nonzero entries: p̂[i-1][i] = -i/(2Δx), p̂[i+1][i] = +i/(2Δx) taken
/// cyclically, so the first row holds -i/(2Δx) at column 1 and +i/(2Δx) at
/// column 2^n - 1.
#[must_use]
pub fn p_hat(grid: &GridSpec) -> CMat {
    let n = grid.points();
    let v = Complex64::new(0.0, -1.0 / (2.0 * grid.dx()));
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        let up = (i + 1) % n;
        let dn = (i + n - 1) % n;
        m[(dn, i)] += v;
        m[(up, i)] -= v;
    }
    m
}

/// m-th power of p̂ (dense, exact for the grid sizes in use).
#[must_use]
pub fn p_pow(grid: &GridSpec, m: usize) -> CMat {
    let dim = grid.points();
    let mut acc = CMat::identity(dim, dim);
    let p = p_hat(grid);
    for _ in 0..m {
        acc = &p * &acc;
    }
    acc
}

/// Diagonal matrix P(x̂) for polynomial coefficients `coeffs`.
#[must_use]
pub fn poly_of_x(grid: &GridSpec, coeffs: &[f64]) -> CMat {
    let n = grid.points();
    CMat::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(poly_eval(coeffs, grid.x(r)), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Cyclic band offsets of a matrix: every o with some entry |M[r][(r+o) mod N]|
/// above `tol`, sorted ascending. For a circulant this is the nonzero layout
/// of the first row.
#[must_use]
pub fn band_offsets(m: &CMat, tol: f64) -> Vec<usize> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    for r in 0..n {
        for c in 0..n {
            if m[(r, c)].norm() > tol {
                seen[(c + n - r) % n] = true;
            }
        }
    }
    (0..n).filter(|&o| seen[o]).collect()
}

/// One-mode dense Hamiltonian Σ_k (α_k P_k(x̂) p̂^{m_k} + α_k* p̂^{m_k} P_k(x̂)).
#[must_use]
pub fn dense_hamiltonian_one_mode(spec: &HamiltonianSpec) -> CMat {
    let grid = &spec.grid;
    let dim = grid.points();
    let mut h = CMat::zeros(dim, dim);
    for t in spec.terms.as_deref().unwrap_or(&[]) {
        let alpha = Complex64::new(t.alpha[0], t.alpha[1]);
        let poly = poly_of_x(grid, &t.poly);
        let pm = p_pow(grid, t.m);
        h += (&poly * &pm).map(|v| alpha * v);
        h += (&pm * &poly).map(|v| alpha.conj() * v);
    }
    h
}

/// Dense matrix of one multi-mode factor on its dimension.
#[must_use]
pub fn dense_factor(grid: &GridSpec, f: &FactorSpec) -> CMat {
    let poly = poly_of_x(grid, &f.poly);
    let pm = p_pow(grid, f.m);
    if f.l == 0 {
        &poly * &pm
    } else {
        &pm * &poly
    }
}

/// Kronecker product with the first argument most significant.
#[must_use]
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Multi-mode dense Hamiltonian Σ_k α_k ⊗_σ R_{k,σ}, dimension 0 most
/// significant; fails if the assembled operator is not Hermitian.
pub fn dense_hamiltonian_multi(spec: &HamiltonianSpec) -> Result<CMat, SpecError> {
    let dims = spec.grids();
    let total: usize = dims.iter().map(|g| g.points()).product();
    let mut h = CMat::zeros(total, total);
    for t in spec.multi_terms.as_deref().unwrap_or(&[]) {
        let alpha = Complex64::new(t.alpha[0], t.alpha[1]);
        let mut acc = CMat::identity(1, 1);
        for (dim, f) in t.factors.iter().enumerate() {
            acc = kron(&acc, &dense_factor(&dims[dim], f));
        }
        h += acc.map(|v| alpha * v);
    }
    let mut dev: f64 = 0.0;
    for r in 0..total {
        for c in 0..total {
            dev = dev.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    if dev > 1e-10 {
        return Err(SpecError::Hermiticity { dev });
    }
    Ok(h)
}

/// Dense Hamiltonian for either spec flavor.
pub fn dense_hamiltonian(spec: &HamiltonianSpec) -> Result<CMat, SpecError> {
    if spec.multi_terms.is_some() {
        dense_hamiltonian_multi(spec)
    } else {
        Ok(dense_hamiltonian_one_mode(spec))
    }
}

/// Walsh spectrum β_i = 2^{-n/2} Σ_κ ψ_κ (-1)^{popcount(κ & i)} of a real
/// diagonal profile of length 2^n.
#[must_use]
pub fn walsh_coefficients(psi: &[f64]) -> Vec<f64> {
    let dim = psi.len();
    debug_assert!(dim.is_power_of_two());
    let norm = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|i| {
            norm * psi
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    if (k & i).count_ones() % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .sum::<f64>()
        })
        .collect()
}

/// Matrix exponential by scaling and squaring of a Taylor series; intended
/// for the small dense matrices this crate verifies against.
#[must_use]
pub fn expm(m: &CMat) -> CMat {
    let dim = m.nrows();
    let norm1: f64 = (0..dim)
        .map(|c| (0..dim).map(|r| m[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let k = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.map(|v| v / Complex64::new(2f64.powi(k as i32), 0.0));
    let mut sum = CMat::identity(dim, dim);
    let mut term = CMat::identity(dim, dim);
    for j in 1..=30 {
        term = (&term * &scaled).map(|v| v / Complex64::new(j as f64, 0.0));
        sum += &term;
    }
    let mut out = sum;
    for _ in 0..k {
        out = &out * &out;
    }
    out
}
