//! Monic Jacobi polynomials for the weight `(1-x)^α (1+x)^β` on `(-1, 1)`.
//!
//! Squared norms use the convention
//! `d_k = 2^{2k} k! (k+α)! (k+β)! (k+α+β)! / ((2k+α+β)! (2k+α+β+1)!)`,
//! which differs from the true `L²` norm of `P_k` by a factor independent of
//! `k`. Only ratios of norms enter the Markov–Bernstein pencil, so that
//! factor never matters.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::{log_gamma, BesselOrder};

/// Exponents of the Jacobi weight `(1-x)^α (1+x)^β`, both `> -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiWeightParams {
    alpha: f64,
    beta: f64,
}

impl JacobiWeightParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must be > -1")));
        }
        if !(beta.is_finite() && beta > -1.0) {
            return Err(Error::InvalidArgument(format!("beta = {beta} must be > -1")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α + β`.
    pub fn sum(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Bessel order `(α - 1) / 2`.
    pub fn nu_alpha(&self) -> f64 {
        (self.alpha - 1.0) / 2.0
    }

    /// Bessel order `(β - 1) / 2`.
    pub fn nu_beta(&self) -> f64 {
        (self.beta - 1.0) / 2.0
    }

    /// The smaller of the two Bessel orders; it governs the asymptotics.
    pub fn nu_star(&self) -> f64 {
        self.nu_alpha().min(self.nu_beta())
    }

    pub fn nu_star_order(&self) -> BesselOrder {
        // α, β > -1 puts ν* above -1.
        BesselOrder::new(self.nu_star()).expect("nu_star > -1 for valid params")
    }

    /// Parameters with `α` raised by one.
    pub fn raise_alpha(&self) -> Self {
        Self {
            alpha: self.alpha + 1.0,
            beta: self.beta,
        }
    }

    /// Parameters with `β` raised by one.
    pub fn raise_beta(&self) -> Self {
        Self {
            alpha: self.alpha,
            beta: self.beta + 1.0,
        }
    }

    /// Total mass `∫ w = 2^{α+β+1} Γ(α+1) Γ(β+1) / Γ(α+β+2)`.
    pub fn weight_mass(&self) -> f64 {
        let s = self.sum();
        ((s + 1.0) * std::f64::consts::LN_2 + lg(self.alpha + 1.0) + lg(self.beta + 1.0)
            - lg(s + 2.0))
        .exp()
    }
}

fn lg(x: f64) -> f64 {
    log_gamma(x).expect("positive argument")
}

/// `d_{k+1} / d_k`.
///
/// At `k = 0` the factor `(1+α+β) / (1+α+β)` is cancelled analytically so the
/// ratio stays finite when `α + β = -1`.
pub fn norm_ratio(params: &JacobiWeightParams, k: usize) -> f64 {
    let (a, b, s) = (params.alpha, params.beta, params.sum());
    if k == 0 {
        return 4.0 * (1.0 + a) * (1.0 + b) / ((s + 2.0) * (s + 2.0) * (s + 3.0));
    }
    let k1 = k as f64 + 1.0;
    let m = 2.0 * k as f64 + s;
    4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + s) / ((m + 1.0) * (m + 2.0) * (m + 2.0) * (m + 3.0))
}

/// The squared monic norms `d_0..=d_n`, held in log form.
///
/// `d_k` decays like `4^{-k}`, so raw values underflow near `k ≈ 500`; the
/// ratios `d_{k+1}/d_k` and the logarithms are always representable.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSequence {
    params: JacobiWeightParams,
    ratios: Vec<f64>,
    log_values: Vec<f64>,
}

impl NormSequence {
    pub fn params(&self) -> &JacobiWeightParams {
        &self.params
    }

    /// Index of the last stored norm (`n` for `d_0..=d_n`).
    pub fn degree(&self) -> usize {
        self.log_values.len() - 1
    }

    /// `d_{k+1} / d_k` for `k < degree()`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.ratios[k]
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn log_value(&self, k: usize) -> f64 {
        self.log_values[k]
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// Raw `d_k`; fails if it falls outside the normal `f64` range.
    pub fn value(&self, k: usize) -> Result<f64> {
        let v = self.log_values[k].exp();
        if v.is_finite() && v >= f64::MIN_POSITIVE {
            Ok(v)
        } else {
            Err(Error::Overflow {
                what: "squared monic Jacobi norm",
                k,
            })
        }
    }

    /// All raw values `d_0..=d_n`.
    pub fn values(&self) -> Result<Vec<f64>> {
        (0..self.log_values.len()).map(|k| self.value(k)).collect()
    }
}

/// `d_0..=d_n` with `d_0 = Γ(α+1) Γ(β+1) / Γ(α+β+2)` and the rest by ratio recurrence.
pub fn norm_sequence(params: &JacobiWeightParams, n: usize) -> Result<NormSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("norm sequence needs n >= 1".into()));
    }
    let log_d0 = lg(params.alpha + 1.0) + lg(params.beta + 1.0) - lg(params.sum() + 2.0);
    let mut ratios = Vec::with_capacity(n);
    let mut log_values = Vec::with_capacity(n + 1);
    log_values.push(log_d0);
    let mut acc = log_d0;
    for k in 0..n {
        let r = norm_ratio(params, k);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Overflow {
                what: "norm ratio",
                k: k + 1,
            });
        }
        acc += r.ln();
        ratios.push(r);
        log_values.push(acc);
    }
    Ok(NormSequence {
        params: *params,
        ratios,
        log_values,
    })
}

/// Coefficients `(a_k, b_k)` of the monic recurrence
/// `P_{k+1}(x) = (x - a_k) P_k(x) - b_k P_{k-1}(x)`; `b_0` is reported as 0.
pub fn monic_recurrence(params: &JacobiWeightParams, k: usize) -> (f64, f64) {
    let (a, b, s) = (params.alpha, params.beta, params.sum());
    let kf = k as f64;
    let m = 2.0 * kf + s;
    let a_k = if k == 0 {
        (b - a) / (s + 2.0)
    } else {
        (b * b - a * a) / (m * (m + 2.0))
    };
    let b_k = match k {
        0 => 0.0,
        // (k+α+β)/(2k+α+β-1) = 1 at k = 1
        1 => 4.0 * (1.0 + a) * (1.0 + b) / ((s + 2.0) * (s + 2.0) * (s + 3.0)),
        _ => 4.0 * kf * (kf + a) * (kf + b) * (kf + s) / (m * m * (m + 1.0) * (m - 1.0)),
    };
    (a_k, b_k)
}

/// Monic Jacobi polynomial `P_k^{(α,β)}(x)` by three-term recurrence.
///
/// Intended for `|x| <= 1` and `k <= 2000`; beyond that `P_k ~ 2^{-k}` underflows.
pub fn monic_eval(params: &JacobiWeightParams, k: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let (a_j, b_j) = monic_recurrence(params, j);
        let next = (x - a_j) * cur - b_j * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[P_0(x), ..., P_n(x)]`.
pub fn monic_eval_all(params: &JacobiWeightParams, n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..n {
        let (a_j, b_j) = monic_recurrence(params, j);
        let next = (x - a_j) * cur - b_j * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `d/dx P_k^{(α,β)}(x) = k P_{k-1}^{(α+1,β+1)}(x)`.
pub fn monic_derivative(params: &JacobiWeightParams, k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let raised = params.raise_alpha().raise_beta();
    k as f64 * monic_eval(&raised, k - 1, x)
}

/// `c_k` in `P_k^{(α,β)} = P_k^{(α+1,β)} - c_k P_{k-1}^{(α+1,β)}`:
/// `c_k = 2k(k+β) / ((2k+α+β)(2k+α+β+1))`.
pub fn raising_coefficient(params: &JacobiWeightParams, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("raising coefficient needs k >= 1".into()));
    }
    let kf = k as f64;
    let m = 2.0 * kf + params.sum();
    Ok(2.0 * kf * (kf + params.beta) / (m * (m + 1.0)))
}

/// Gauss–Jacobi rule with `m` nodes (Golub–Welsch), exact for degree `<= 2m - 1`.
///
/// Nodes are returned in ascending order.
pub fn gauss_jacobi_quadrature(
    params: &JacobiWeightParams,
    m: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature needs m >= 1".into()));
    }
    let mass = params.weight_mass();
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let (a_k, _) = monic_recurrence(params, k);
        jacobi[(k, k)] = a_k;
        if k + 1 < m {
            let (_, b_next) = monic_recurrence(params, k + 1);
            let off = b_next.sqrt();
            jacobi[(k, k + 1)] = off;
            jacobi[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000).ok_or(Error::Convergence {
        what: "Golub-Welsch tridiagonal eigen-decomposition",
        iterations: 10_000,
    })?;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let first = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * first * first)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs.into_iter().unzip())
}
