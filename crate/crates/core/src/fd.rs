//! Exact finite-difference objects at `λ = 0`.
//!
//! The change of variables `v_k = s_k x_k` with
//! `s_k = (2k+α+β+1)! / (2^k (k+α)! (k+β)!)` turns the pencil rows into a
//! difference equation whose two particular solutions at `λ = 0` are plain
//! gamma ratios. The bundle `Y_k` built from four consecutive `x` values
//! grows like `k^{b_j}` times a fixed leading vector.

use crate::error::{Error, Result};
use crate::jacobi::JacobiWeightParams;
use crate::pencil::{Band, BandedPencil};
use crate::special::dd::Dd;
use crate::special::{log_gamma, log_gamma_ratio};

/// Which endpoint exponent a solution is tied to: `α` (at `x = 1`) or `β` (at `x = -1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Alpha,
    Beta,
}

impl Branch {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Branch::Alpha),
            2 => Ok(Branch::Beta),
            _ => Err(Error::InvalidArgument(format!("branch index must be 1 or 2, got {j}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Branch::Alpha => 1,
            Branch::Beta => 2,
        }
    }

    /// `b_j`: `α` for the first branch, `β` for the second.
    pub fn exponent(self, params: &JacobiWeightParams) -> f64 {
        match self {
            Branch::Alpha => params.alpha(),
            Branch::Beta => params.beta(),
        }
    }

    /// The branch whose Bessel order is `ν*`; ties go to `α`.
    pub fn dominant(params: &JacobiWeightParams) -> Self {
        if params.alpha() <= params.beta() {
            Branch::Alpha
        } else {
            Branch::Beta
        }
    }

    /// Limit of `Y_k / k^{b_j}` (even `k` for the alternating branch).
    pub fn leading_vector(self, params: &JacobiWeightParams) -> [f64; 4] {
        let b = self.exponent(params);
        match self {
            Branch::Alpha => [2.0, 0.0, 4.0 * b, 0.0],
            Branch::Beta => [0.0, 2.0, 0.0, 4.0 * b],
        }
    }
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sequence from a starting value and a ratio recurrence, failing on overflow.
fn by_ratios(first: f64, n: usize, ratio: impl Fn(f64) -> f64, what: &'static str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut value = first;
    for k in 0..n {
        if !value.is_finite() {
            return Err(Error::Overflow { what, k });
        }
        out.push(value);
        value *= ratio(k as f64);
    }
    Ok(out)
}

/// `s_0 .. s_{n-1}`.
pub fn scale_factors(params: &JacobiWeightParams, n: usize) -> Result<Vec<f64>> {
    let (a, b, s) = (params.alpha(), params.beta(), params.sum());
    let first = (log_gamma(s + 2.0)? - log_gamma(a + 1.0)? - log_gamma(b + 1.0)?).exp();
    by_ratios(
        first,
        n,
        |k| (2.0 * k + s + 2.0) * (2.0 * k + s + 3.0) / (2.0 * (k + 1.0 + a) * (k + 1.0 + b)),
        "v/x scale factor",
    )
}

/// `ln s_0 .. ln s_{n-1}`; never overflows.
pub fn log_scale_factors(params: &JacobiWeightParams, n: usize) -> Result<Vec<f64>> {
    let (a, b, s) = (params.alpha(), params.beta(), params.sum());
    let mut value = log_gamma(s + 2.0)? - log_gamma(a + 1.0)? - log_gamma(b + 1.0)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(value);
        let k = k as f64;
        value += ((2.0 * k + s + 2.0) * (2.0 * k + s + 3.0) / (2.0 * (k + 1.0 + a) * (k + 1.0 + b))).ln();
    }
    Ok(out)
}

/// `x_k = v_k / s_k`.
pub fn scale_v_to_x(params: &JacobiWeightParams, v: &[f64]) -> Result<Vec<f64>> {
    let s = scale_factors(params, v.len())?;
    Ok(v.iter().zip(&s).map(|(v, s)| v / s).collect())
}

/// `v_k = s_k x_k`.
pub fn scale_x_to_v(params: &JacobiWeightParams, x: &[f64]) -> Result<Vec<f64>> {
    let s = scale_factors(params, x.len())?;
    Ok(x.iter().zip(&s).map(|(x, s)| x * s).collect())
}

/// Pencil coordinates or the rescaled `x` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    V,
    X,
}

/// One of the two exact null solutions of the pencil rows at `λ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticularSolution {
    pub branch: Branch,
    /// `b_j`.
    pub exponent: f64,
    pub coordinates: Coordinates,
    pub values: Vec<f64>,
}

/// `v^{(1)}_k = (2k+α+β+1)! / (2^k k! (k+β)!)` or
/// `v^{(2)}_k = (2k+α+β+1)! / ((-2)^k k! (k+α)!)`.
pub fn particular_v(params: &JacobiWeightParams, branch: Branch, n: usize) -> Result<ParticularSolution> {
    if n == 0 {
        return Err(Error::InvalidArgument("particular solution needs n >= 1".into()));
    }
    let s = params.sum();
    let (other, flip) = match branch {
        Branch::Alpha => (params.beta(), 1.0),
        Branch::Beta => (params.alpha(), -1.0),
    };
    let first = (log_gamma(s + 2.0)? - log_gamma(other + 1.0)?).exp();
    let values = by_ratios(
        first,
        n,
        |k| flip * (2.0 * k + s + 2.0) * (2.0 * k + s + 3.0) / (2.0 * (k + 1.0) * (k + 1.0 + other)),
        "particular solution",
    )?;
    Ok(ParticularSolution {
        branch,
        exponent: branch.exponent(params),
        coordinates: Coordinates::V,
        values,
    })
}

/// `x^{(1)}_k = (k+α)!/k!`, `x^{(2)}_k = (-1)^k (k+β)!/k!`.
pub fn particular_x(params: &JacobiWeightParams, branch: Branch, k: usize) -> f64 {
    let b = branch.exponent(params);
    let kf = k as f64;
    let magnitude = log_gamma_ratio(kf + b + 1.0, kf + 1.0)
        .expect("positive gamma arguments")
        .exp();
    match branch {
        Branch::Alpha => magnitude,
        Branch::Beta => sign(k) * magnitude,
    }
}

/// `x^{(j)}_0 .. x^{(j)}_{n-1}` as a solution record.
pub fn particular_x_solution(params: &JacobiWeightParams, branch: Branch, n: usize) -> ParticularSolution {
    ParticularSolution {
        branch,
        exponent: branch.exponent(params),
        coordinates: Coordinates::X,
        values: (0..n).map(|k| particular_x(params, branch, k)).collect(),
    }
}

/// `h_k = (2k+α+β+2)! / ((-2)^k k! (k+α+1)!)`, the sequence annihilated by the rows of `C₂`.
pub fn c2_null_vector(params: &JacobiWeightParams, n: usize) -> Result<Vec<f64>> {
    let (a, s) = (params.alpha(), params.sum());
    let first = (log_gamma(s + 3.0)? - log_gamma(a + 2.0)?).exp();
    by_ratios(
        first,
        n,
        |k| -(2.0 * k + s + 3.0) * (2.0 * k + s + 4.0) / (2.0 * (k + 1.0) * (k + a + 2.0)),
        "C2 null vector",
    )
}

/// Outcome of applying `A` to a particular solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCheck {
    pub support_ok: bool,
    /// Components `n-2` and `n-1` of `A v`.
    pub tail: [f64; 2],
    /// `max_{k < n-2} |(A v)_k| / max_k |(A v)_k|`.
    pub leakage: f64,
}

pub const SUPPORT_TOLERANCE: f64 = 1e-10;

fn summarize(av: &[f64]) -> SupportCheck {
    let n = av.len();
    let top = av.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let head = av[..n.saturating_sub(2)].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let leakage = if top == 0.0 { 0.0 } else { head / top };
    let tail = [if n >= 2 { av[n - 2] } else { 0.0 }, av[n - 1]];
    SupportCheck { support_ok: leakage < SUPPORT_TOLERANCE, tail, leakage }
}

/// Apply `A` (at `λ = 0`) to an arbitrary vector and check that only the
/// last two components survive.
///
/// Plain f64: for growing sequences the head carries rounding of order
/// `ε · 2^n` relative to the tail. Use [`particular_support`] for the
/// particular solutions themselves.
pub fn residual_support(pencil: &BandedPencil, values: &[f64]) -> Result<SupportCheck> {
    let n = pencil.size();
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: values.len() });
    }
    Ok(summarize(&pencil.apply_operator(0.0, values)?))
}

/// [`residual_support`] for `v^{(j)}`, with `v^{(j)}` and `N⁻¹C₂C₁v^{(j)}`
/// carried in double-double so the cancellation in the head is resolved.
pub fn particular_support(pencil: &BandedPencil, branch: Branch) -> Result<SupportCheck> {
    let params = pencil.params();
    let n = pencil.size();
    let v = particular_v_extended(params, branch, n)?;
    let u = g_times_extended(params, &v);
    let weighted: Vec<f64> = (0..n)
        .map(|k| Ok(u[k] * pencil.norms().value(k + 1)?))
        .collect::<Result<_>>()?;
    // Aᵀ-side: Gᵀ applied to a vector whose head is already near zero.
    let g = pencil.g();
    let mut av: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = g.diag[k] * weighted[k];
            if k >= 1 {
                acc += g.first[k - 1] * weighted[k - 1];
            }
            if k >= 2 {
                acc += g.second[k - 2] * weighted[k - 2];
            }
            acc
        })
        .collect();
    if pencil.is_perturbed() {
        let plain: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
        let a = pencil.raw_a()?;
        for (band, scale) in Band::ALL.into_iter().zip(pencil.band_scales()) {
            if scale != 1.0 {
                // raw_a already includes the scale; recover the unscaled band.
                let extra = a.apply_band(band, &plain)?;
                for (o, e) in av.iter_mut().zip(extra) {
                    *o += e * (scale - 1.0) / scale;
                }
            }
        }
    }
    Ok(summarize(&av))
}

fn particular_v_extended(params: &JacobiWeightParams, branch: Branch, n: usize) -> Result<Vec<Dd>> {
    let first = particular_v(params, branch, 1)?.values[0];
    let s = Dd::from_f64(params.alpha()) + params.beta();
    let (other, flip) = match branch {
        Branch::Alpha => (params.beta(), 1.0),
        Branch::Beta => (params.alpha(), -1.0),
    };
    let mut out = Vec::with_capacity(n);
    let mut value = Dd::from_f64(first);
    for k in 0..n {
        if !value.to_f64().is_finite() {
            return Err(Error::Overflow { what: "particular solution", k });
        }
        out.push(value);
        let k = k as f64;
        let m = s + 2.0 * k;
        let num = (m + 2.0) * (m + 3.0) * flip;
        let den = Dd::from_f64(2.0 * (k + 1.0)) * (Dd::from_f64(k + 1.0) + other);
        value = value * (num / den);
    }
    Ok(out)
}

/// `N⁻¹ C₂ C₁ v` with all intermediate values in double-double.
fn g_times_extended(params: &JacobiWeightParams, v: &[Dd]) -> Vec<f64> {
    let n = v.len();
    let s = Dd::from_f64(params.alpha()) + params.beta();
    let coefficient = |k: usize, lowers_alpha: bool| {
        let kf = k as f64;
        let m = s + 2.0 * kf;
        if lowers_alpha {
            // C₁ entry, negated
            -(Dd::from_f64(2.0 * kf) * (Dd::from_f64(kf) + params.beta())) / (m * (m + 1.0))
        } else {
            (Dd::from_f64(2.0 * kf) * (Dd::from_f64(kf) + params.alpha() + 1.0)) / ((m + 1.0) * (m + 2.0))
        }
    };
    let c1v: Vec<Dd> = (0..n)
        .map(|k| if k + 1 < n { v[k] + coefficient(k + 1, true) * v[k + 1] } else { v[k] })
        .collect();
    (0..n)
        .map(|k| {
            let z = if k + 1 < n { c1v[k] + coefficient(k + 1, false) * c1v[k + 1] } else { c1v[k] };
            z.to_f64() / (k as f64 + 1.0)
        })
        .collect()
}

/// `Y_k` from `x_{k-2} .. x_{k+1}`.
pub fn y_bundle(x: &[f64], k: usize) -> Result<[f64; 4]> {
    if k < 2 || k + 1 >= x.len() {
        return Err(Error::InvalidArgument(format!(
            "bundle index {k} needs 2 <= k <= {}",
            x.len().saturating_sub(2)
        )));
    }
    let (a, b, c, d) = (x[k - 2], x[k - 1], x[k], x[k + 1]);
    let kf = k as f64;
    Ok([a + b, a - b, kf * (-(a + b) + (c + d)), kf * (-(a - b) + (c - d))])
}

/// `‖Y_k / k^{b_j} - C₀‖_∞`.
pub fn matching_defect(params: &JacobiWeightParams, branch: Branch, x: &[f64], k: usize) -> Result<f64> {
    let y = y_bundle(x, k)?;
    let scale = (k as f64).powf(branch.exponent(params));
    let lead = branch.leading_vector(params);
    Ok(y.iter().zip(&lead).map(|(y, c)| (y / scale - c).abs()).fold(0.0, f64::max))
}

/// Eigenvector of `B` expressed in `x` coordinates, `x_k = w_k / (√d_k s_k)`.
///
/// Scaled so that `max |x_k| = 1`; computed in log space.
pub fn eigenvector_to_x(pencil: &BandedPencil, w: &[f64]) -> Result<Vec<f64>> {
    let n = pencil.size();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let log_s = log_scale_factors(pencil.params(), n)?;
    let log_d = pencil.norms().log_values();
    let logs: Vec<f64> = (0..n)
        .map(|k| if w[k] == 0.0 { f64::NEG_INFINITY } else { w[k].abs().ln() - 0.5 * log_d[k] - log_s[k] })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::domain("eigenvector_to_x", "zero eigenvector"));
    }
    Ok(w.iter().zip(&logs).map(|(x, l)| x.signum() * (l - top).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::{build_c1, build_c2, build_pencil};

    fn params(a: f64, b: f64) -> JacobiWeightParams {
        JacobiWeightParams::new(a, b).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn scale_examples() {
        let s = scale_factors(&params(0.0, 0.0), 2).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-14);
        let v = vec![0.3, -1.2, 5.0, 7.5, -2.0];
        let p = params(1.3, -0.6);
        let back = scale_x_to_v(&p, &scale_v_to_x(&p, &v).unwrap()).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!(rel(*b, *a) < 1e-13);
        }
    }

    #[test]
    fn scale_matches_log_gamma() {
        let p = params(0.7, 2.2);
        let s = scale_factors(&p, 60).unwrap();
        let ls = log_scale_factors(&p, 60).unwrap();
        for k in [0usize, 5, 59] {
            let kf = k as f64;
            let direct = log_gamma(2.0 * kf + p.sum() + 2.0).unwrap()
                - kf * std::f64::consts::LN_2
                - log_gamma(kf + p.alpha() + 1.0).unwrap()
                - log_gamma(kf + p.beta() + 1.0).unwrap();
            assert!(rel(s[k].ln(), direct) < 1e-12 || (s[k].ln() - direct).abs() < 1e-12);
            assert!((ls[k] - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn particular_v_examples() {
        let p = params(0.0, 0.0);
        let v1 = particular_v(&p, Branch::Alpha, 3).unwrap();
        assert!(rel(v1.values[1], 3.0) < 1e-15 && rel(v1.values[2], 7.5) < 1e-15);
        let v2 = particular_v(&p, Branch::Beta, 3).unwrap();
        assert!(rel(v2.values[1], -3.0) < 1e-15 && rel(v2.values[2], 7.5) < 1e-15);
        let v = particular_v(&params(1.0, 0.0), Branch::Alpha, 1).unwrap();
        assert!(rel(v.values[0], 2.0) < 1e-15);
        assert!(particular_v(&p, Branch::Alpha, 0).is_err());
        assert!(Branch::from_index(3).is_err());
    }

    #[test]
    fn particular_x_examples() {
        for k in 0..6 {
            assert!((particular_x(&params(0.0, 0.4), Branch::Alpha, k) - 1.0).abs() < 1e-14);
            assert!((particular_x(&params(0.4, 0.0), Branch::Beta, k) - sign(k)).abs() < 1e-14);
        }
        assert!(rel(particular_x(&params(1.0, 0.0), Branch::Alpha, 3), 4.0) < 1e-14);
    }

    #[test]
    fn v_and_x_solutions_agree() {
        for &(a, b) in &[(0.0, 0.0), (2.5, -0.5), (-0.5, 1.0)] {
            let p = params(a, b);
            for branch in [Branch::Alpha, Branch::Beta] {
                let v = particular_v(&p, branch, 40).unwrap();
                let x = scale_v_to_x(&p, &v.values).unwrap();
                for (k, xk) in x.iter().enumerate() {
                    assert!(rel(*xk, particular_x(&p, branch, k)) < 1e-12, "({a},{b}) {branch:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn homogeneous_factors() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 2.5), (-0.5, -0.5)] {
            let p = params(a, b);
            let n = 25;
            let v = particular_v(&p, Branch::Alpha, n).unwrap().values;
            let c1v = build_c1(&p, n).unwrap().apply(&v).unwrap();
            for k in 0..n - 1 {
                assert!(c1v[k].abs() < 1e-12 * v[k].abs(), "C1 row {k}");
            }
            let h = c2_null_vector(&p, n).unwrap();
            let c2h = build_c2(&p, n).unwrap().apply(&h).unwrap();
            for k in 0..n - 1 {
                assert!(c2h[k].abs() < 1e-12 * h[k].abs(), "C2 row {k}");
            }
        }
    }

    #[test]
    fn support_examples() {
        let pencil = build_pencil(&params(0.0, 0.0), 6).unwrap();
        for branch in [Branch::Alpha, Branch::Beta] {
            assert!(particular_support(&pencil, branch).unwrap().support_ok);
            let v = particular_v(pencil.params(), branch, 6).unwrap();
            assert!(residual_support(&pencil, &v.values).unwrap().support_ok);
        }
        let random = [0.3, -1.0, 0.7, 2.0, -0.1, 0.5];
        assert!(!residual_support(&pencil, &random).unwrap().support_ok);
        assert!(residual_support(&pencil, &random[..5]).is_err());
    }

    #[test]
    fn support_at_twenty() {
        for &a in &[-0.5, 0.0, 0.5, 1.0, 2.5] {
            for &b in &[-0.5, 0.0, 0.5, 1.0, 2.5] {
                let pencil = build_pencil(&params(a, b), 20).unwrap();
                for branch in [Branch::Alpha, Branch::Beta] {
                    let check = particular_support(&pencil, branch).unwrap();
                    assert!(check.support_ok, "({a},{b}) {branch:?} leak {:e}", check.leakage);
                }
            }
        }
    }

    #[test]
    fn extended_support_agrees_with_plain_path() {
        let pencil = build_pencil(&params(0.5, 1.0), 12).unwrap();
        for branch in [Branch::Alpha, Branch::Beta] {
            let v = particular_v(pencil.params(), branch, 12).unwrap();
            let plain = residual_support(&pencil, &v.values).unwrap();
            let extended = particular_support(&pencil, branch).unwrap();
            for (a, b) in plain.tail.iter().zip(&extended.tail) {
                assert!(rel(*a, *b) < 1e-8);
            }
            assert!(extended.leakage <= plain.leakage.max(1e-20));
        }
    }

    #[test]
    fn perturbed_pencil_breaks_support() {
        let pencil = build_pencil(&params(0.0, 1.0), 20).unwrap();
        let bent = pencil.with_scaled_band(crate::pencil::Band::Second, 1.0 + 1e-6);
        for branch in [Branch::Alpha, Branch::Beta] {
            assert!(!particular_support(&bent, branch).unwrap().support_ok);
        }
    }

    #[test]
    fn bundle_examples() {
        let c = 1.7;
        assert_eq!(y_bundle(&[c; 6], 3).unwrap(), [2.0 * c, 0.0, 0.0, 0.0]);
        let alt: Vec<f64> = (0..6).map(|k| sign(k) * c).collect();
        let y = y_bundle(&alt, 2).unwrap();
        assert_eq!(y, [0.0, 2.0 * c, 0.0, 0.0]);
        let y = y_bundle(&alt, 3).unwrap();
        assert_eq!(y, [0.0, -2.0 * c, 0.0, 0.0]);
        assert!(y_bundle(&alt, 1).is_err());
        assert!(y_bundle(&alt, 5).is_err());
    }

    #[test]
    fn matching_law_decays_like_one_over_k() {
        for &(a, b) in &[(0.5, 1.0), (2.5, 0.3), (-0.5, -0.5), (1.0, 3.9)] {
            let p = params(a, b);
            for branch in [Branch::Alpha, Branch::Beta] {
                let x = particular_x_solution(&p, branch, 170).values;
                let defects: Vec<f64> =
                    [20, 40, 80, 160].iter().map(|&k| matching_defect(&p, branch, &x, k).unwrap()).collect();
                for pair in defects.windows(2) {
                    let ratio = pair[0] / pair[1];
                    assert!((1.6..=2.4).contains(&ratio), "({a},{b}) {branch:?} {defects:?}");
                }
            }
        }
    }

    #[test]
    fn matching_law_exact_for_zero_exponent() {
        let p = params(0.0, 0.0);
        for branch in [Branch::Alpha, Branch::Beta] {
            let x = particular_x_solution(&p, branch, 50).values;
            assert!(matching_defect(&p, branch, &x, 20).unwrap() < 1e-14);
        }
    }

    #[test]
    fn eigenvector_maps_through_both_scalings() {
        let p = params(1.0, 0.5);
        let pencil = build_pencil(&p, 30).unwrap();
        let w: Vec<f64> = (0..30).map(|k| ((k as f64) * 0.37).sin() + 0.1).collect();
        let x = eigenvector_to_x(&pencil, &w).unwrap();
        let d = pencil.raw_d().unwrap();
        let direct = scale_v_to_x(&p, &w.iter().zip(&d).map(|(w, d)| w / d.sqrt()).collect::<Vec<_>>()).unwrap();
        let top = direct.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for (a, b) in x.iter().zip(&direct) {
            assert!((a - b / top).abs() < 1e-12);
        }
    }
}
