//! Input data model: JSON Hamiltonian specifications.
//!
//! A one-mode spec describes H = Σ_k (α_k P_k(x̂) p̂^{m_k} + α_k* p̂^{m_k} P_k(x̂))
//! on a 2^n-point uniform grid over [a, b] ⊆ [-1, 1]. A multi-mode spec lists
//! one grid per dimension and terms that are Kronecker products of per-dimension
//! factors; Hermiticity of the assembled operator is then the user's burden and
//! is re-checked numerically at load time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation and parse failures for spec files.
#[derive(Error, Debug)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("grid must satisfy -1 <= a < b <= 1, got [{a}, {b}]")]
    GridRange { a: f64, b: f64 },
    #[error("grid needs n >= 2 qubits, got {0}")]
    GridTooSmall(usize),
    #[error("spec must contain exactly one of `terms` or `multi_terms`")]
    ExactlyOneTermBlock,
    #[error("spec contains no terms")]
    NoTerms,
    #[error("term {term}: polynomial has mixed parity")]
    MixedParity { term: usize },
    #[error("term {term}: |P| reaches {sup} on the grid; values must stay below 1")]
    PolyOutOfRange { term: usize, sup: f64 },
    #[error("term {term}: empty polynomial")]
    EmptyPoly { term: usize },
    #[error("term {term}: factor count {got} does not match {want} dimensions")]
    FactorCount { term: usize, got: usize, want: usize },
    #[error("term {term}: ordering flag L must be 0 or 1, got {got}")]
    BadOrdering { term: usize, got: u8 },
    #[error("`multi_terms` requires a `dims` array")]
    MissingDims,
    #[error("assembled operator is not Hermitian: max |H - H^dag| entry = {dev:.3e}")]
    Hermiticity { dev: f64 },
}

/// Uniform grid: 2^n points x_i = a + i (b-a)/(2^n - 1).
#[derive(Deserialize, Serialize, Clone, Copy, Debug)]
pub struct GridSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl GridSpec {
    /// Number of grid points.
    #[inline]
    #[must_use]
    pub fn points(&self) -> usize {
        1usize << self.n
    }

    /// Grid step (b - a) / (2^n - 1).
    #[inline]
    #[must_use]
    pub fn dx(&self) -> f64 {
        (self.b - self.a) / ((self.points() - 1) as f64)
    }

    /// Coordinate of grid point i.
    #[inline]
    #[must_use]
    pub fn x(&self, i: usize) -> f64 {
        self.a + self.dx() * (i as f64)
    }

    pub(crate) fn validate(&self) -> Result<(), SpecError> {
        if self.n < 2 {
            return Err(SpecError::GridTooSmall(self.n));
        }
        if !(self.a >= -1.0 && self.a < self.b && self.b <= 1.0) {
            return Err(SpecError::GridRange {
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }
}

/// One-mode term: alpha * P(x) p^m plus its Hermitian conjugate.
#[derive(Deserialize, Serialize, Clone, Debug)]
pub struct TermSpec {
    /// [re, im] of the complex coefficient.
    pub alpha: [f64; 2],
    /// Polynomial coefficients c_0 + c_1 x + ... of definite parity.
    pub poly: Vec<f64>,
    /// Momentum power.
    pub m: usize,
}

/// One factor of a multi-mode term, acting on a single dimension.
#[derive(Deserialize, Serialize, Clone, Debug)]
pub struct FactorSpec {
    /// Ordering flag: 0 applies P(x) after p^m, 1 applies it before.
    #[serde(rename = "L")]
    pub l: u8,
    pub poly: Vec<f64>,
    pub m: usize,
}

/// Multi-mode term: alpha times the Kronecker product of its factors,
/// dimension 0 most significant.
#[derive(Deserialize, Serialize, Clone, Debug)]
pub struct MultiTermSpec {
    pub alpha: [f64; 2],
    pub factors: Vec<FactorSpec>,
}

/// Parsed Hamiltonian specification.
#[derive(Deserialize, Serialize, Clone, Debug)]
pub struct HamiltonianSpec {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<GridSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_terms: Option<Vec<MultiTermSpec>>,
}

/// Evaluates c_0 + c_1 y + ... by Horner's rule.
#[inline]
#[must_use]
pub fn poly_eval(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
}

/// Degree after trailing-zero stripping; the zero polynomial has degree 0.
#[must_use]
pub fn poly_degree(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .unwrap_or(0)
}

/// Parity of a definite-parity polynomial: 0 even, 1 odd.
pub fn poly_parity(coeffs: &[f64]) -> Option<u8> {
    let mut parity: Option<u8> = None;
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            let p = (i % 2) as u8;
            match parity {
                None => parity = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
    }
    Some(parity.unwrap_or(0))
}

const SUP_GRID: usize = 10_000;
const SUP_MARGIN: f64 = 1e-12;

fn validate_poly(term: usize, coeffs: &[f64], grid: &GridSpec) -> Result<(), SpecError> {
    if coeffs.is_empty() {
        return Err(SpecError::EmptyPoly { term });
    }
    if poly_parity(coeffs).is_none() {
        return Err(SpecError::MixedParity { term });
    }
    let mut sup: f64 = 0.0;
    for k in 0..=SUP_GRID {
        let y = grid.a + (grid.b - grid.a) * (k as f64) / (SUP_GRID as f64);
        sup = sup.max(poly_eval(coeffs, y).abs());
    }
    for i in 0..grid.points() {
        sup = sup.max(poly_eval(coeffs, grid.x(i)).abs());
    }
    if sup >= 1.0 - SUP_MARGIN {
        return Err(SpecError::PolyOutOfRange { term, sup });
    }
    Ok(())
}

impl HamiltonianSpec {
    /// Parses and validates a spec from JSON text.
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let spec: HamiltonianSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Structural validation; the multi-mode Hermiticity check is numeric
    /// and lives with the dense assembly.
    pub fn validate(&self) -> Result<(), SpecError> {
        self.grid.validate()?;
        match (&self.terms, &self.multi_terms) {
            (Some(_), Some(_)) | (None, None) => return Err(SpecError::ExactlyOneTermBlock),
            _ => {}
        }
        if let Some(terms) = &self.terms {
            if terms.is_empty() {
                return Err(SpecError::NoTerms);
            }
            for (k, t) in terms.iter().enumerate() {
                validate_poly(k, &t.poly, &self.grid)?;
            }
        }
        if let Some(multi) = &self.multi_terms {
            let dims = self.dims.as_ref().ok_or(SpecError::MissingDims)?;
            for d in dims {
                d.validate()?;
            }
            if multi.is_empty() {
                return Err(SpecError::NoTerms);
            }
            for (k, t) in multi.iter().enumerate() {
                if t.factors.len() != dims.len() {
                    return Err(SpecError::FactorCount {
                        term: k,
                        got: t.factors.len(),
                        want: dims.len(),
                    });
                }
                for (dim, f) in t.factors.iter().enumerate() {
                    if f.l > 1 {
                        return Err(SpecError::BadOrdering { term: k, got: f.l });
                    }
                    validate_poly(k, &f.poly, &dims[dim])?;
                }
            }
        }
        Ok(())
    }

    /// Grids in use: the per-dimension list for multi-mode specs, else the
    /// single one-mode grid.
    #[must_use]
    pub fn grids(&self) -> Vec<GridSpec> {
        match &self.dims {
            Some(d) => d.clone(),
            None => vec![self.grid],
        }
    }
}
