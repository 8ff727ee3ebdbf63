use proptest::prelude::*;

use mb_lab::eigen::{dense, eigenvalues_below, sharp_constant, smallest_eigenpair, DEFAULT_TOLERANCE};
use mb_lab::fd::{particular_v, particular_x, scale_v_to_x, scale_x_to_v, Branch};
use mb_lab::jacobi::{monic_recurrence, norm_sequence};
use mb_lab::ode::{profile_y, ProfileBranch};
use mb_lab::pencil::build_pencil;
use mb_lab::special::{bessel_j, log_gamma, smallest_positive_zero, BesselOrder};
use mb_lab::JacobiWeightParams;

fn exponent() -> impl Strategy<Value = f64> {
    -0.95f64..4.0
}

fn order(nu: f64) -> BesselOrder {
    BesselOrder::new(nu).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_gamma_recurrence(x in 0.05f64..60.0) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() < 1e-13 * (1.0 + lhs.abs()));
    }

    #[test]
    fn bessel_three_term_recurrence(nu in 0.5f64..20.0, x in 0.1f64..25.0) {
        let sum = bessel_j(order(nu - 1.0), x).unwrap() + bessel_j(order(nu + 1.0), x).unwrap();
        let rhs = 2.0 * nu / x * bessel_j(order(nu), x).unwrap();
        prop_assert!((sum - rhs).abs() < 1e-11, "{sum} vs {rhs}");
    }

    #[test]
    fn bessel_half_integer_closed_form(x in 0.01f64..30.0) {
        let s = (2.0 / (std::f64::consts::PI * x)).sqrt();
        prop_assert!((bessel_j(order(0.5), x).unwrap() - s * x.sin()).abs() < 1e-12);
        prop_assert!((bessel_j(order(-0.5), x).unwrap() - s * x.cos()).abs() < 1e-12);
    }

    #[test]
    fn zeros_increase_with_order(nu in -0.99f64..45.0, step in 0.01f64..5.0) {
        let a = smallest_positive_zero(order(nu)).unwrap();
        let b = smallest_positive_zero(order(nu + step)).unwrap();
        prop_assert!(b > a);
        prop_assert!(bessel_j(order(nu), a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn recurrence_coefficients_are_norm_ratios(a in exponent(), b in exponent(), k in 1usize..200) {
        let p = JacobiWeightParams::new(a, b).unwrap();
        let norms = norm_sequence(&p, k).unwrap();
        let (_, b_k) = monic_recurrence(&p, k);
        let want = (norms.log_value(k) - norms.log_value(k - 1)).exp();
        prop_assert!(((b_k - want) / want).abs() < 1e-12);
    }

    #[test]
    fn scaling_round_trips(a in exponent(), b in exponent(), v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let p = JacobiWeightParams::new(a, b).unwrap();
        let back = scale_x_to_v(&p, &scale_v_to_x(&p, &v).unwrap()).unwrap();
        for (x, y) in v.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn particular_solutions_agree_in_both_coordinates(a in exponent(), b in exponent(), alt in any::<bool>()) {
        let p = JacobiWeightParams::new(a, b).unwrap();
        let branch = if alt { Branch::Beta } else { Branch::Alpha };
        let x = scale_v_to_x(&p, &particular_v(&p, branch, 50).unwrap().values).unwrap();
        for (k, xk) in x.iter().enumerate() {
            let want = particular_x(&p, branch, k);
            prop_assert!(((xk - want) / want).abs() < 1e-12);
        }
    }

    #[test]
    fn small_t_profile_matches(b in -0.9f64..4.0, l in 0.5f64..100.0) {
        let br = ProfileBranch::new(Branch::Alpha, b, l).unwrap();
        let t: f64 = 0.01;
        let lead = profile_y(&br, t).unwrap() / t.powf(b);
        prop_assert!((lead - 2.0).abs() < 1e-5, "{lead}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn banded_matches_dense(a in exponent(), b in exponent(), n in 1usize..=8) {
        let p = JacobiWeightParams::new(a, b).unwrap();
        let banded = sharp_constant(&p, n, DEFAULT_TOLERANCE).unwrap().lambda_min;
        let direct = dense::pencil_lambda_min(&p, n).unwrap();
        prop_assert!(((banded - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn constant_grows_with_degree(a in exponent(), b in exponent(), n in 1usize..300) {
        let p = JacobiWeightParams::new(a, b).unwrap();
        let m = sharp_constant(&p, n, DEFAULT_TOLERANCE).unwrap();
        let next = sharp_constant(&p, n + 1, DEFAULT_TOLERANCE).unwrap();
        prop_assert!(next.m_n >= m.m_n * (1.0 - 1e-12));
        prop_assert!((m.m_n * m.m_n * m.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_certificate(a in exponent(), b in exponent(), n in 1usize..600, tol_exp in 6i32..=13) {
        let tol = 10f64.powi(-tol_exp);
        let pencil = build_pencil(&JacobiWeightParams::new(a, b).unwrap(), n).unwrap();
        let e = smallest_eigenpair(&pencil, tol).unwrap();
        prop_assert!(e.lambda_min > 0.0);
        prop_assert!(e.residual <= tol);
        prop_assert_eq!(eigenvalues_below(pencil.symmetrized(), e.lambda_min * (1.0 - tol)), 0);
        prop_assert!(eigenvalues_below(pencil.symmetrized(), e.lambda_min * (1.0 + tol)) >= 1);
    }

    #[test]
    fn rayleigh_quotients_bounded(a in exponent(), b in exponent(), n in 2usize..30,
                                  seed in prop::collection::vec(-1.0f64..1.0, 30)) {
        let pencil = build_pencil(&JacobiWeightParams::new(a, b).unwrap(), n).unwrap();
        let m2 = smallest_eigenpair(&pencil, DEFAULT_TOLERANCE).unwrap().lambda_min.recip();
        let w = &seed[..n];
        let bw = pencil.symmetrized().apply(w).unwrap();
        let num: f64 = w.iter().map(|x| x * x).sum();
        let den: f64 = w.iter().zip(&bw).map(|(x, y)| x * y).sum();
        if num > 0.0 {
            prop_assert!(num / den <= m2 * (1.0 + 1e-9));
        }
    }
}
