//! Scalar phase model and phase-finding for signal processing.
//!
//! A phase list Φ = (φ_1, ..., φ_q) acts on x ∈ [-1, 1] through the 2x2
//! product
//!
//! ```text
//! U_Φ(x) = E(φ_1) R(x) E(φ_2) R(x) ... E(φ_q) R(x),
//! R(x) = [[x, √(1-x²)], [√(1-x²), -x]],   E(φ) = diag(e^{iφ}, e^{-iφ}).
//! ```
//!
//! The top-left entry of U_Φ(x) is a degree-q polynomial with parity q mod 2,
//! and its real part is the transform that phase-alternating circuits apply
//! to every encoded value. [`solve_phases`] inverts the map: given monomial
//! coefficients of a target bounded by 1 on [-1, 1] with the right parity,
//! it returns phases whose real part matches the target to 1e-10.

use num_complex::Complex64;
use thiserror::Error;

/// Errors from phase finding.
#[derive(Error, Debug)]
pub enum PhaseError {
    #[error("coefficient {index} breaks the parity required of a degree-{degree} target")]
    MixedParity { index: usize, degree: usize },
    #[error("degree-0 targets other than 1 have no phase representation")]
    ConstantTarget,
    #[error("phase solver stalled at residual {residual:.3e}")]
    NotConverged { residual: f64 },
}

/// Solved phase list together with the worst fit residual on [-1, 1].
#[derive(Clone, Debug)]
pub struct PhaseSequence {
    pub phis: Vec<f64>,
    pub residual: f64,
}

type M2 = [[Complex64; 2]; 2];

#[inline]
fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

#[inline]
fn ident() -> M2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]
}

#[inline]
fn reflection(x: f64) -> M2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    [
        [Complex64::new(x, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(-x, 0.0)],
    ]
}

#[inline]
fn factor(phi: f64, r: &M2) -> M2 {
    let e0 = Complex64::new(0.0, phi).exp();
    let e1 = e0.conj();
    [
        [e0 * r[0][0], e0 * r[0][1]],
        [e1 * r[1][0], e1 * r[1][1]],
    ]
}

/// Evaluates the top-left entry of U_Φ(x); the empty list gives 1.
#[must_use]
pub fn eval_qsp(phis: &[f64], x: f64) -> Complex64 {
    let r = reflection(x);
    let mut p = ident();
    for &phi in phis {
        p = mul(&p, &factor(phi, &r));
    }
    p[0][0]
}

/// Phases whose signal polynomial is the Chebyshev polynomial T_q.
#[must_use]
pub fn chebyshev_phases(q: usize) -> Vec<f64> {
    let mut phis = vec![std::f64::consts::FRAC_PI_2; q];
    if q > 0 {
        phis[0] = (1.0 - q as f64) * std::f64::consts::FRAC_PI_2;
    }
    phis
}

const NODES: usize = 201;
const TARGET_RESIDUAL: f64 = 1e-10;

fn nodes() -> Vec<f64> {
    (0..NODES)
        .map(|t| (std::f64::consts::PI * t as f64 / (NODES - 1) as f64).cos())
        .collect()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Residual vector, Jacobian, and max |residual| of Re U_Φ[0][0] against the
/// target values on the given nodes.
fn residual_jacobian(
    phis: &[f64],
    xs: &[f64],
    targets: &[f64],
) -> (nalgebra::DVector<f64>, nalgebra::DMatrix<f64>, f64) {
    let q = phis.len();
    let mut r = nalgebra::DVector::zeros(xs.len());
    let mut jac = nalgebra::DMatrix::zeros(xs.len(), q);
    let mut maxr: f64 = 0.0;
    let i = Complex64::i();
    for (t, (&x, &y)) in xs.iter().zip(targets.iter()).enumerate() {
        let refl = reflection(x);
        let factors: Vec<M2> = phis.iter().map(|&p| factor(p, &refl)).collect();
        let mut suf = vec![ident(); q + 1];
        for j in (0..q).rev() {
            suf[j] = mul(&factors[j], &suf[j + 1]);
        }
        let mut pre = ident();
        for j in 0..q {
            let d = i * pre[0][0] * suf[j][0][0] - i * pre[0][1] * suf[j][1][0];
            jac[(t, j)] = d.re;
            pre = mul(&pre, &factors[j]);
        }
        let res = pre[0][0].re - y;
        r[t] = res;
        maxr = maxr.max(res.abs());
    }
    (r, jac, maxr)
}

fn levenberg_marquardt(
    init: &[f64],
    xs: &[f64],
    targets: &[f64],
) -> (Vec<f64>, f64) {
    let q = init.len();
    let mut phis = nalgebra::DVector::from_column_slice(init);
    let (mut r, mut jac, mut maxr) = residual_jacobian(phis.as_slice(), xs, targets);
    let mut sse = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..500 {
        if maxr <= TARGET_RESIDUAL {
            break;
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &r;
        let mut advanced = false;
        for _ in 0..40 {
            let mut m = a.clone();
            for d in 0..q {
                m[(d, d)] += lambda;
            }
            let Some(step) = m.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &phis - &step;
            let (r2, j2, maxr2) = residual_jacobian(trial.as_slice(), xs, targets);
            let sse2 = r2.norm_squared();
            if sse2 < sse {
                phis = trial;
                r = r2;
                jac = j2;
                maxr = maxr2;
                sse = sse2;
                lambda = (lambda * 0.35).max(1e-14);
                advanced = true;
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    (phis.as_slice().to_vec(), maxr)
}

/// Finds phases whose real signal polynomial matches the monomial
/// coefficients `coeffs` (constant term first, length = degree + 1) on
/// [-1, 1] to within 1e-10. The target must have parity degree mod 2 and
/// stay within [-1, 1] on the interval; the returned list has exactly
/// `degree` phases. Initial guesses are deterministic, so repeated runs
/// yield identical phases.
pub fn solve_phases(coeffs: &[f64]) -> Result<PhaseSequence, PhaseError> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        let c0 = coeffs.first().copied().unwrap_or(0.0);
        if (c0 - 1.0).abs() <= TARGET_RESIDUAL {
            return Ok(PhaseSequence {
                phis: Vec::new(),
                residual: (c0 - 1.0).abs(),
            });
        }
        return Err(PhaseError::ConstantTarget);
    }
    for (index, &c) in coeffs.iter().enumerate() {
        if c != 0.0 && index % 2 != degree % 2 {
            return Err(PhaseError::MixedParity { index, degree });
        }
    }
    let xs = nodes();
    let targets: Vec<f64> = xs.iter().map(|&x| horner(coeffs, x)).collect();

    let mut best_residual = f64::INFINITY;
    let mut best_phis = vec![0.0; degree];
    let mut attempt_init = vec![vec![0.0; degree], chebyshev_phases(degree)];
    let mut lcg: u64 = 0x2545_F491_4F6C_DD1D;
    for spread in 1..=8u32 {
        let mut init = chebyshev_phases(degree);
        for p in init.iter_mut() {
            lcg = lcg
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            let u = (lcg >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            *p += u * 0.8 / f64::from(spread);
        }
        attempt_init.push(init);
    }
    for init in attempt_init {
        let (phis, residual) = levenberg_marquardt(&init, &xs, &targets);
        if residual < best_residual {
            best_residual = residual;
            best_phis = phis;
        }
        if best_residual <= TARGET_RESIDUAL {
            return Ok(PhaseSequence {
                phis: best_phis,
                residual: best_residual,
            });
        }
    }
    Err(PhaseError::NotConverged {
        residual: best_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chebyshev_t(q: usize, x: f64) -> f64 {
        match q {
            0 => 1.0,
            1 => x,
            _ => {
                let (mut a, mut b) = (1.0, x);
                for _ in 2..=q {
                    let c = 2.0 * x * b - a;
                    a = b;
                    b = c;
                }
                b
            }
        }
    }

    #[test]
    fn single_zero_phase_is_identity_signal() {
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let p = eval_qsp(&[0.0], x);
            assert!((p - Complex64::new(x, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn chebyshev_phases_give_chebyshev_polynomials() {
        for q in 1..=6 {
            let phis = chebyshev_phases(q);
            for t in 0..=40 {
                let x = -1.0 + 2.0 * t as f64 / 40.0;
                let got = eval_qsp(&phis, x).re;
                assert!(
                    (got - chebyshev_t(q, x)).abs() < 1e-12,
                    "T_{q} at {x}: {got}"
                );
            }
        }
    }

    #[test]
    fn signal_magnitude_never_exceeds_one() {
        let phis = [0.3, -1.1, 0.9, 2.2, -0.4];
        for t in 0..=100 {
            let x = -1.0 + 0.02 * t as f64;
            assert!(eval_qsp(&phis, x).norm() <= 1.0 + 1e-12);
        }
    }

    fn check_fit(coeffs: &[f64]) {
        let seq = solve_phases(coeffs).expect("phases");
        assert_eq!(seq.phis.len(), coeffs.len() - 1);
        for t in 0..=400 {
            let x = -1.0 + t as f64 / 200.0;
            let got = eval_qsp(&seq.phis, x).re;
            let want = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            assert!(
                (got - want).abs() < 5e-10,
                "target {coeffs:?} at {x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn solver_fits_odd_targets() {
        check_fit(&[0.0, 0.7]);
        check_fit(&[0.0, -0.3, 0.0, 0.5]);
        check_fit(&[0.0, 0.25, 0.0, -0.45, 0.0, 0.6]);
    }

    #[test]
    fn solver_fits_even_targets() {
        check_fit(&[0.1, 0.0, 0.4, 0.0, -0.4]);
        check_fit(&[-0.2, 0.0, 0.55]);
        check_fit(&[0.05, 0.0, -0.3, 0.0, 0.0, 0.0, 0.2]);
    }

    #[test]
    fn solver_rejects_mixed_parity() {
        assert!(matches!(
            solve_phases(&[0.1, 0.7]),
            Err(PhaseError::MixedParity { .. })
        ));
    }

    #[test]
    fn solver_handles_trivial_constant() {
        let seq = solve_phases(&[1.0]).expect("constant one");
        assert!(seq.phis.is_empty());
        assert!(matches!(
            solve_phases(&[0.4]),
            Err(PhaseError::ConstantTarget)
        ));
    }

    #[test]
    fn solved_phases_are_deterministic() {
        let a = solve_phases(&[0.0, 0.25, 0.0, -0.45, 0.0, 0.6]).unwrap();
        let b = solve_phases(&[0.0, 0.25, 0.0, -0.45, 0.0, 0.6]).unwrap();
        assert_eq!(a.phis, b.phis);
    }
}
