//! The continuous limit: Bessel profiles, the root condition, and checks that
//! the discrete eigenvector converges to the profile.
//!
//! With `λ = l / n⁴` and `t = k / n`, the difference equation tends to
//!
//! ```text
//! y'' = y'/t - (t² l - b(b-2)/t²) y
//! ```
//!
//! whose solution matched to the discrete data near `t = 0` is
//! `y(t, l) = 2^b Γ(ν+1) l^{-ν/2} t J_ν(√l t² / 2)` with `ν = (b-1)/2`.

use rayon::prelude::*;

use crate::eigen::{smallest_eigenpair, validate_tolerance, SharpConstantReport};
use crate::error::{Error, Result};
use crate::fd::{eigenvector_to_x, y_bundle, Branch};
use crate::jacobi::JacobiWeightParams;
use crate::pencil::build_pencil;
use crate::special::{bessel_j, log_gamma, smallest_positive_zero, BesselOrder};

/// One limiting profile: endpoint exponent `b`, order `ν = (b-1)/2`, and `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBranch {
    pub branch: Branch,
    pub exponent: f64,
    pub l: f64,
}

impl ProfileBranch {
    pub fn new(branch: Branch, exponent: f64, l: f64) -> Result<Self> {
        if !(exponent > -1.0) || !exponent.is_finite() {
            return Err(Error::domain("ProfileBranch", format!("exponent {exponent} must exceed -1")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::domain("ProfileBranch", format!("l = {l} must be positive")));
        }
        Ok(ProfileBranch { branch, exponent, l })
    }

    pub fn for_params(params: &JacobiWeightParams, branch: Branch, l: f64) -> Result<Self> {
        Self::new(branch, branch.exponent(params), l)
    }

    pub fn nu(&self) -> f64 {
        (self.exponent - 1.0) / 2.0
    }

    fn order(&self) -> BesselOrder {
        BesselOrder::new(self.nu()).expect("exponent > -1 gives order > -1")
    }

    fn prefactor(&self) -> f64 {
        let nu = self.nu();
        (self.exponent * std::f64::consts::LN_2 + log_gamma(nu + 1.0).expect("nu > -1")
            - 0.5 * nu * self.l.ln())
        .exp()
    }

    fn argument(&self, t: f64) -> f64 {
        self.l.sqrt() * t * t / 2.0
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("profile", format!("t = {t} outside (0, 1]")))
    }
}

/// `y(t, l) = 2^b Γ(ν+1) l^{-ν/2} t J_ν(√l t²/2)`.
pub fn profile_y(branch: &ProfileBranch, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(branch.prefactor() * t * bessel_j(branch.order(), branch.argument(t))?)
}

/// `y'(t, l) = 2^b Γ(ν+1) l^{-ν/2} (b J_ν(z) - 2z J_{ν+1}(z))`, `z = √l t²/2`.
pub fn profile_y_prime(branch: &ProfileBranch, t: f64) -> Result<f64> {
    check_t(t)?;
    let z = branch.argument(t);
    let next = BesselOrder::new(branch.nu() + 1.0)?;
    let value = branch.exponent * bessel_j(branch.order(), z)? - 2.0 * z * bessel_j(next, z)?;
    Ok(branch.prefactor() * value)
}

const RESIDUAL_T_RANGE: (f64, f64) = (0.05, 1.0);

/// Relative residual of `y'' - y'/t + (t² l - b(b-2)/t²) y` for an arbitrary
/// function, with derivatives from 4th-order central differences refined by
/// one Richardson step.
pub fn ode_residual_of<F>(f: F, exponent: f64, l: f64, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(RESIDUAL_T_RANGE.0..=RESIDUAL_T_RANGE.1).contains(&t) {
        return Err(Error::domain("ode_residual", format!("t = {t} outside [0.05, 1]")));
    }
    let derivatives = |h: f64| -> Result<(f64, f64, f64, f64)> {
        let v: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|s| f(t + s * h))
            .collect::<Result<_>>()?;
        let first = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
        let second = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
        let stencil_max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok((v[2], first, second, stencil_max))
    };
    // The stencil reaches t + 2h, which must stay within the profile domain.
    let h = (1e-3_f64).min(t / 8.0).min((1.0 - t).max(0.0) / 2.0);
    let (y, d1, d2, ymax) = if h > 1e-6 {
        let (y, d1c, d2c, m1) = derivatives(h)?;
        let (_, d1f, d2f, m2) = derivatives(h / 2.0)?;
        (y, (16.0 * d1f - d1c) / 15.0, (16.0 * d2f - d2c) / 15.0, m1.max(m2))
    } else {
        // Too close to t = 1 for a central stencil.
        one_sided(&f, t)?
    };
    let residual = d2 - d1 / t + (t * t * l - exponent * (exponent - 2.0) / (t * t)) * y;
    let scale = ymax.max(d1.abs()).max(d2.abs());
    Ok(if scale == 0.0 { residual.abs() } else { residual.abs() / scale })
}

/// Derivatives at the right end `t = 1` from a backward 6-point stencil.
fn one_sided<F>(f: &F, t: f64) -> Result<(f64, f64, f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = 1e-3;
    let v: Vec<f64> = (0..7).map(|i| f(t - i as f64 * h)).collect::<Result<_>>()?;
    // Backward differences, 5th order accurate for y', 4th for y''.
    let first = (147.0 * v[0] - 360.0 * v[1] + 450.0 * v[2] - 400.0 * v[3] + 225.0 * v[4] - 72.0 * v[5]
        + 10.0 * v[6])
        / (60.0 * h);
    let second = (812.0 * v[0] - 3132.0 * v[1] + 5265.0 * v[2] - 5080.0 * v[3] + 2970.0 * v[4]
        - 972.0 * v[5]
        + 137.0 * v[6])
        / (180.0 * h * h);
    let stencil_max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok((v[0], first, second, stencil_max))
}

/// [`ode_residual_of`] for the closed-form profile.
pub fn ode_residual(branch: &ProfileBranch, t: f64) -> Result<f64> {
    ode_residual_of(|s| profile_y(branch, s), branch.exponent, branch.l, t)
}

/// `n² / (2 j_ν*)`.
pub fn predicted_constant(params: &JacobiWeightParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    Ok((n as f64).powi(2) / (2.0 * smallest_positive_zero(params.nu_star_order())?))
}

/// `(2 j_ν*)²`, the smallest `l` at which the profile vanishes at `t = 1`.
pub fn root_condition_min_l(params: &JacobiWeightParams) -> Result<f64> {
    Ok((2.0 * smallest_positive_zero(params.nu_star_order())?).powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileComparison {
    pub sup_defect: f64,
    pub branch: Branch,
    /// `α = β`: both branches carry the profile; the first is used.
    pub degenerate: bool,
    /// `n⁴ λ_min`.
    pub l_star: f64,
    /// `(t, discrete, profile)` over the comparison window, both normalized.
    pub samples: Vec<(f64, f64, f64)>,
}

fn normalize(values: &mut [f64]) {
    let lead = values.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead != 0.0 {
        values.iter_mut().for_each(|x| *x /= lead);
    }
}

/// Compare the eigenvector with the closed-form profile over `k ∈ [n/4, n-2]`.
pub fn profile_compare(params: &JacobiWeightParams, n: usize, tol: f64) -> Result<ProfileComparison> {
    if n < 50 {
        return Err(Error::InvalidArgument(format!("profile comparison needs n >= 50, got {n}")));
    }
    validate_tolerance(tol)?;
    let pencil = build_pencil(params, n)?;
    let eig = smallest_eigenpair(&pencil, tol)?;
    let x = eigenvector_to_x(&pencil, &eig.vector)?;
    let branch = Branch::dominant(params);
    let l_star = (n as f64).powi(4) * eig.lambda_min;
    let profile = ProfileBranch::for_params(params, branch, l_star)?;

    let window: Vec<usize> = (n.div_ceil(4)..=n - 2).collect();
    let mut discrete = Vec::with_capacity(window.len());
    let mut closed = Vec::with_capacity(window.len());
    for &k in &window {
        let y = y_bundle(&x, k)?;
        discrete.push(match branch {
            Branch::Alpha => y[0],
            Branch::Beta => if k % 2 == 0 { y[1] } else { -y[1] },
        });
        closed.push(profile_y(&profile, k as f64 / n as f64)?);
    }
    normalize(&mut discrete);
    normalize(&mut closed);
    let sup_defect = discrete.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let samples = window
        .iter()
        .zip(discrete.iter().zip(&closed))
        .map(|(&k, (a, b))| (k as f64 / n as f64, *a, *b))
        .collect();
    Ok(ProfileComparison {
        sup_defect,
        branch,
        degenerate: params.alpha() == params.beta(),
        l_star,
        samples,
    })
}

/// Sharp-constant reports for each `n`, solved in parallel and returned in order.
pub fn convergence_study(params: &JacobiWeightParams, ns: &[usize], tol: f64) -> Result<Vec<SharpConstantReport>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degrees must be strictly ascending".into()));
    }
    validate_tolerance(tol)?;
    ns.par_iter()
        .map(|&n| crate::eigen::sharp_constant(params, n, tol))
        .collect()
}
