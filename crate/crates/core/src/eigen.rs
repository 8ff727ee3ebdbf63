//! Smallest eigenpair of the pencil, the sharp constant and the extremal polynomial.
//!
//! All work happens on the symmetrized matrix `B = D^{-1/2} A D^{-1/2}`.
//! The eigenvalue comes from bisection on the Sylvester inertia of the banded
//! `LDLᵀ` factorization of `B - μI`, which leaves a bracketing certificate;
//! the eigenvector from a few steps of inverse iteration below the bracket.

use crate::error::{Error, Result};
use crate::jacobi::{gauss_jacobi_quadrature, monic_derivative, monic_eval_all, JacobiWeightParams};
use crate::pencil::{build_pencil, BandedPencil, SymmetricBands};
use crate::special::smallest_positive_zero;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
const TOLERANCE_RANGE: (f64, f64) = (1e-14, 1e-6);
const MAX_BISECTION_STEPS: usize = 4000;
const MIN_INVERSE_STEPS: usize = 2;
const MAX_INVERSE_STEPS: usize = 5;

pub fn validate_tolerance(tol: f64) -> Result<()> {
    if (TOLERANCE_RANGE.0..=TOLERANCE_RANGE.1).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance {tol} outside [{:e}, {:e}]",
            TOLERANCE_RANGE.0, TOLERANCE_RANGE.1
        )))
    }
}

/// Banded `LDLᵀ` of `B - μI` without pivoting.
struct Ldl {
    pivots: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl Ldl {
    fn factor(b: &SymmetricBands, mu: f64) -> Self {
        let n = b.size();
        let floor = f64::EPSILON * b.max_abs().max(mu.abs()).max(f64::MIN_POSITIVE);
        let mut pivots = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let mut d = b.diag[i] - mu;
            if i >= 2 {
                l2[i] = b.second[i - 2] / pivots[i - 2];
                d -= l2[i] * l2[i] * pivots[i - 2];
            }
            if i >= 1 {
                let mut off = b.first[i - 1];
                if i >= 2 {
                    off -= l2[i] * pivots[i - 2] * l1[i - 1];
                }
                l1[i] = off / pivots[i - 1];
                d -= l1[i] * l1[i] * pivots[i - 1];
            }
            // An exact zero pivot means μ sits on an eigenvalue of a leading
            // block; nudging it keeps the count well defined.
            if d.abs() < floor {
                d = if d < 0.0 { -floor } else { floor };
            }
            pivots[i] = d;
        }
        Ldl { pivots, l1, l2 }
    }

    fn negative_count(&self) -> usize {
        self.pivots.iter().filter(|d| **d < 0.0).count()
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n {
            if i >= 1 {
                y[i] -= self.l1[i] * y[i - 1];
            }
            if i >= 2 {
                y[i] -= self.l2[i] * y[i - 2];
            }
        }
        for (yi, d) in y.iter_mut().zip(&self.pivots) {
            *yi /= d;
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                y[i] -= self.l1[i + 1] * y[i + 1];
            }
            if i + 2 < n {
                y[i] -= self.l2[i + 2] * y[i + 2];
            }
        }
        y
    }
}

/// Number of eigenvalues of `b` below `mu`.
pub fn eigenvalues_below(b: &SymmetricBands, mu: f64) -> usize {
    Ldl::factor(b, mu).negative_count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Smallest eigenvalue of the pencil, `M_n^{-2}`.
    pub lambda_min: f64,
    /// Unit eigenvector of `B`; the pencil eigenvector is `D^{-1/2}` times this.
    pub vector: Vec<f64>,
    /// `‖(B - λ)w‖ / ‖w‖`.
    pub residual: f64,
    /// Bisection plus inverse-iteration steps.
    pub iterations: usize,
    /// Final bracket `[lo, hi]` with no eigenvalue below `lo` and at least one below `hi`.
    pub bracket: (f64, f64),
    /// Two or more eigenvalues fell inside the final bracket.
    pub multiple: bool,
}

fn initial_upper_bound(pencil: &BandedPencil) -> f64 {
    let n = pencil.size() as f64;
    match smallest_positive_zero(pencil.params().nu_star_order()) {
        Ok(j) => (2.0 * (j + 2.0)).powi(2) / n.powi(4),
        Err(_) => 1.0 / n.powi(4),
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    // Both parities present, so even/odd decoupled pencils are covered.
    (0..n)
        .map(|k| 1.0 + 0.5 * if k % 2 == 0 { 1.0 } else { -1.0 } + 0.25 * k as f64 / n as f64)
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Smallest eigenpair of the pencil to relative accuracy `tol`.
pub fn smallest_eigenpair(pencil: &BandedPencil, tol: f64) -> Result<EigenResult> {
    validate_tolerance(tol)?;
    let b = pencil.symmetrized();
    let n = b.size();
    if eigenvalues_below(b, 0.0) != 0 {
        return Err(Error::domain("smallest_eigenpair", "pencil matrix is not positive definite"));
    }

    let mut iterations = 0;
    let mut hi = initial_upper_bound(pencil);
    while eigenvalues_below(b, hi) == 0 {
        hi *= 2.0;
        iterations += 1;
        if !hi.is_finite() || iterations > MAX_BISECTION_STEPS {
            return Err(Error::Convergence { what: "eigenvalue bracketing", iterations });
        }
    }
    let mut lo = 0.0;
    while hi - lo > tol * lo {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eigenvalues_below(b, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_BISECTION_STEPS {
            return Err(Error::Convergence { what: "eigenvalue bisection", iterations });
        }
    }
    let lambda = 0.5 * (lo + hi);
    let multiple = eigenvalues_below(b, hi) >= 2;

    // Below the bracket B - σI is positive definite, and σ is within tol·λ of
    // the eigenvalue, so each solve gains a factor of about tol·λ / gap.
    let shifted = Ldl::factor(b, lo);
    let mut w = start_vector(n);
    let mut residual = f64::INFINITY;
    for step in 1..=MAX_INVERSE_STEPS {
        w = shifted.solve(&w);
        let scale = norm(&w);
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Convergence { what: "inverse iteration", iterations: iterations + step });
        }
        w.iter_mut().for_each(|x| *x /= scale);
        residual = norm(&pencil.apply_symmetrized(lambda, &w)?);
        iterations += 1;
        if step >= MIN_INVERSE_STEPS && residual <= 1e-3 * tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::Convergence { what: "inverse iteration", iterations });
    }
    // The Rayleigh quotient is second-order accurate in the vector error; kept
    // inside the bracket so the inertia certificate still holds.
    let bw = b.apply(&w)?;
    let rayleigh: f64 = w.iter().zip(&bw).map(|(x, y)| x * y).sum();
    let lambda = if rayleigh.is_finite() { rayleigh.clamp(lo, hi) } else { lambda };
    let residual = norm(&pencil.apply_symmetrized(lambda, &w)?).min(residual);
    // Fix the sign so the largest component is positive.
    let lead = w.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(EigenResult { lambda_min: lambda, vector: w, residual, iterations, bracket: (lo, hi), multiple })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpConstantReport {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_min: f64,
    pub m_n: f64,
    /// `n² / (2 j_ν*)`.
    pub predicted: f64,
    pub ratio: f64,
    pub residual: f64,
    pub multiple: bool,
}

impl SharpConstantReport {
    pub fn from_eigen(params: &JacobiWeightParams, n: usize, eig: &EigenResult) -> Result<Self> {
        let m_n = eig.lambda_min.sqrt().recip();
        let j = smallest_positive_zero(params.nu_star_order())?;
        let predicted = (n as f64).powi(2) / (2.0 * j);
        Ok(SharpConstantReport {
            n,
            alpha: params.alpha(),
            beta: params.beta(),
            lambda_min: eig.lambda_min,
            m_n,
            predicted,
            ratio: m_n / predicted,
            residual: eig.residual,
            multiple: eig.multiple,
        })
    }
}

/// `M_n` for the weight `params` and degree `n`.
pub fn sharp_constant(params: &JacobiWeightParams, n: usize, tol: f64) -> Result<SharpConstantReport> {
    validate_tolerance(tol)?;
    let pencil = build_pencil(params, n)?;
    let eig = smallest_eigenpair(&pencil, tol)?;
    SharpConstantReport::from_eigen(params, n, &eig)
}

/// Extremal polynomial `Q = Σ u_k P_{k+1}` with `Q' = Σ v_k P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPolynomial {
    pub params: JacobiWeightParams,
    pub u: Vec<f64>,
    /// Scaled so that `max |v_k| = 1` with the largest entry positive.
    pub v: Vec<f64>,
    pub m_n: f64,
    pub eigen: EigenResult,
}

/// Map a unit eigenvector of `B` back to pencil coordinates `v = D^{-1/2} w`.
///
/// Scaling happens in log space; entries smaller than the f64 range relative
/// to the largest one are flushed to zero.
pub fn pencil_coefficients(pencil: &BandedPencil, w: &[f64]) -> Result<Vec<f64>> {
    let n = pencil.size();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let log_d = pencil.norms().log_values();
    let logs: Vec<f64> = w
        .iter()
        .zip(log_d)
        .map(|(x, ld)| if *x == 0.0 { f64::NEG_INFINITY } else { x.abs().ln() - 0.5 * ld })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::domain("pencil_coefficients", "zero eigenvector"));
    }
    Ok(w.iter().zip(&logs).map(|(x, l)| x.signum() * (l - top).exp()).collect())
}

/// `(Σ v_k² d_k) / (Σ u_k² d_{k+1})`, evaluated in log space.
pub fn coefficient_ratio(pencil: &BandedPencil, u: &[f64], v: &[f64]) -> f64 {
    let log_d = pencil.norms().log_values();
    let log_sum = |terms: Vec<f64>| {
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    };
    let log_square = |x: f64| if x == 0.0 { f64::NEG_INFINITY } else { 2.0 * x.abs().ln() };
    let num = log_sum(v.iter().zip(log_d).map(|(x, ld)| log_square(*x) + ld).collect());
    let den = log_sum(u.iter().zip(&log_d[1..]).map(|(x, ld)| log_square(*x) + ld).collect());
    (num - den).exp()
}

pub fn extremal_polynomial(params: &JacobiWeightParams, n: usize, tol: f64) -> Result<ExtremalPolynomial> {
    validate_tolerance(tol)?;
    let pencil = build_pencil(params, n)?;
    let eigen = smallest_eigenpair(&pencil, tol)?;
    let v = pencil_coefficients(&pencil, &eigen.vector)?;
    let u = pencil.g().apply(&v)?;
    Ok(ExtremalPolynomial { params: *params, u, v, m_n: eigen.lambda_min.sqrt().recip(), eigen })
}

/// `‖Q'‖ / ‖Q‖` for `Q = Σ u_k P_{k+1}`, by Gauss–Jacobi quadrature.
///
/// `Q'` is evaluated through the derivative formula for monic Jacobi
/// polynomials, not through the coefficients `v`.
pub fn quadrature_norm_ratio(params: &JacobiWeightParams, u: &[f64]) -> Result<f64> {
    let n = u.len();
    let (nodes, weights) = gauss_jacobi_quadrature(params, n + 2)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, wt) in nodes.iter().zip(&weights) {
        let p = monic_eval_all(params, n, *x);
        let q: f64 = u.iter().enumerate().map(|(k, c)| c * p[k + 1]).sum();
        let dq: f64 = u.iter().enumerate().map(|(k, c)| c * monic_derivative(params, k + 1, *x)).sum();
        num += wt * dq * dq;
        den += wt * q * q;
    }
    Ok((num / den).sqrt())
}

/// Dense reference solvers for small `n`, independent of the banded path.
pub mod dense {
    use nalgebra::{DMatrix, SymmetricEigen};

    use super::*;
    use crate::special::log_gamma;

    /// `d_k` straight from the factorial formula.
    pub fn norm_constant(params: &JacobiWeightParams, k: usize) -> Result<f64> {
        let (a, b, s) = (params.alpha(), params.beta(), params.sum());
        if k == 0 {
            return Ok((log_gamma(a + 1.0)? + log_gamma(b + 1.0)? - log_gamma(s + 2.0)?).exp());
        }
        let k = k as f64;
        let log = 2.0 * k * std::f64::consts::LN_2 + log_gamma(k + 1.0)? + log_gamma(k + a + 1.0)?
            + log_gamma(k + b + 1.0)?
            + log_gamma(k + s + 1.0)?
            - log_gamma(2.0 * k + s + 1.0)?
            - log_gamma(2.0 * k + s + 2.0)?;
        Ok(log.exp())
    }

    fn spectrum(m: DMatrix<f64>, what: &'static str) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
            .ok_or(Error::Convergence { what, iterations: 100_000 })?;
        Ok(eig.eigenvalues.iter().copied().collect())
    }

    /// Dense `A = C₁ᵀC₂ᵀN⁻¹D⁺N⁻¹C₂C₁`, `D`, and the minimum of the
    /// spectrum of `D^{-1/2} A D^{-1/2}`.
    pub fn pencil_lambda_min(params: &JacobiWeightParams, n: usize) -> Result<f64> {
        let (a, b, s) = (params.alpha(), params.beta(), params.sum());
        let mut c1 = DMatrix::<f64>::identity(n, n);
        let mut c2 = DMatrix::<f64>::identity(n, n);
        for k in 1..n {
            let kf = k as f64;
            let m = 2.0 * kf + s;
            c1[(k - 1, k)] = -2.0 * kf * (kf + b) / (m * (m + 1.0));
            c2[(k - 1, k)] = 2.0 * kf * (kf + a + 1.0) / ((m + 1.0) * (m + 2.0));
        }
        let d: Vec<f64> = (0..=n).map(|k| norm_constant(params, k)).collect::<Result<_>>()?;
        let n_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| 1.0 / (i as f64 + 1.0)));
        let d_plus = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| d[i + 1]));
        let g = &n_inv * &c2 * &c1;
        let a_mat = g.transpose() * d_plus * &g;
        let scaled = DMatrix::from_fn(n, n, |i, j| a_mat[(i, j)] / (d[i] * d[j]).sqrt());
        let sym = (&scaled + scaled.transpose()) * 0.5;
        let eigs = spectrum(sym, "dense pencil eigensolve")?;
        Ok(eigs.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `1 / max ‖Q'‖²/‖Q‖²` over `Q ∈ span{P_1 … P_n}` from quadrature Gram
    /// matrices of orthonormalized polynomials and their derivatives.
    pub fn gram_lambda_min(params: &JacobiWeightParams, n: usize) -> Result<f64> {
        let (nodes, weights) = gauss_jacobi_quadrature(params, n + 2)?;
        let mut values = DMatrix::<f64>::zeros(n, nodes.len());
        let mut slopes = DMatrix::<f64>::zeros(n, nodes.len());
        for (q, (x, wt)) in nodes.iter().zip(&weights).enumerate() {
            let root = wt.sqrt();
            let p = monic_eval_all(params, n, *x);
            for k in 0..n {
                values[(k, q)] = root * p[k + 1];
                slopes[(k, q)] = root * monic_derivative(params, k + 1, *x);
            }
        }
        // Orthonormalize through the quadrature mass matrix rather than
        // trusting any closed-form norm.
        let mass = &values * values.transpose();
        let chol = nalgebra::Cholesky::new(mass)
            .ok_or_else(|| Error::domain("gram_lambda_min", "mass matrix not positive definite"))?;
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::domain("gram_lambda_min", "singular Cholesky factor"))?;
        let stiffness = &slopes * slopes.transpose();
        let reduced = &l_inv * stiffness * l_inv.transpose();
        let sym = (&reduced + reduced.transpose()) * 0.5;
        let eigs = spectrum(sym, "dense Gram eigensolve")?;
        Ok(1.0 / eigs.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}
