mod common;

use abelprop::poly;
use abelprop::series::{self, Branch, SeriesCoeffs};
use abelprop::Error;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::q;

#[test]
fn mu_for_unit_thetas_is_three_halves_binomial_exact() {
    let one = q(1, 1);
    let mu = series::mu_scaled(&[one.clone(), one.clone(), one], 20).unwrap();
    let mut expected = BigRational::one();
    for (n, m) in mu.iter().enumerate() {
        assert_eq!(*m, expected, "n = {n}");
        // binom(−3/2, n+1) = binom(−3/2, n)·(−3/2 − n)/(n+1)
        expected = expected * (q(-3, 2) - q(n as i64, 1)) / q(n as i64 + 1, 1);
    }
    assert_eq!(mu.len(), 21);
}

#[test]
fn mu_scaled_matches_generalized_binomial() {
    let third = q(1, 3);
    for p in 0..10 {
        let b = series::gen_binomial(q(-1, 2), p);
        let s = series::inv_sqrt_binomial_series(&third, p);
        assert_eq!(s[p], b * q(3, 1).pow(p as i32));
    }
}

#[test]
fn convolution_is_associative_exact() {
    let mut r = common::rng(31);
    for _ in 0..20 {
        let th = [0, 1, 2].map(|_| common::positive_rational(&mut r, 12, 5));
        let s = th.clone().map(|t| series::inv_sqrt_binomial_series(&t, 12));
        let left = poly::convolve(&poly::convolve(&s[0], &s[1]), &s[2]);
        let right = poly::convolve(&poly::convolve(&s[1], &s[2]), &s[0]);
        assert_eq!(left, right);
        assert_eq!(&series::mu_scaled(&th, 12).unwrap()[..], &left[..13]);
    }
}

#[test]
fn convolution_route_matches_triple_sum() {
    let theta = [0.7, 1.9, 3.2];
    let mu = series::mu_coeffs(theta, 15).unwrap();
    for (n, m) in mu.iter().enumerate() {
        let t = series::mu_triple_sum(theta, n);
        assert!((m - t).abs() <= 1e-13 * t.abs().max(1.0), "n = {n}");
    }
}

#[test]
fn mu_rejects_non_positive_theta() {
    assert!(matches!(
        series::mu_coeffs([1.0, 0.0, 2.0], 5),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        series::mu_coeffs([1.0, -1.0, 2.0], 5),
        Err(Error::Domain(_))
    ));
    assert!(series::mu_coeffs([1.0, f64::NAN, 2.0], 5).is_err());
}

proptest! {
    #[test]
    fn binomial_partial_sums_converge(theta in 0.05f64..20.0, frac in -0.5f64..0.5) {
        let x = frac * theta;
        let coeffs = series::inv_sqrt_binomial_series(&theta, 40);
        let sum = poly::horner(&coeffs, x) / theta.sqrt();
        let direct = 1.0 / (x + theta).sqrt();
        prop_assert!((sum - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn lambda_partial_sums_match_log(a in 0.1f64..10.0, c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let x = 0.1 * c / a;
        let lambda = series::lambda_coeffs_f64(a, c, 29).unwrap();
        // Σ λₙ x^(n+1)
        let sum = x * poly::horner(&lambda, x);
        let direct = -(1.0 + a * x / c).ln() / a;
        prop_assert!((sum - direct).abs() < 1e-10);
    }

    #[test]
    fn sigma_one_nonzero_off_the_critical_product(
        theta in proptest::array::uniform3(0.1f64..5.0),
        d in 0.1f64..5.0,
        c in 0.2f64..3.0,
    ) {
        let product = theta[0] * theta[1] * theta[2];
        prop_assume!((product - c * c / d).abs() > 1e-6 * (c * c / d));
        let s = SeriesCoeffs::build(1.0, c, d, theta, 3).unwrap();
        prop_assert!(s.sigma_plus[0] != 0.0 && s.sigma_minus[0] != 0.0);
        let expected = 1.0 / (d * product).sqrt();
        prop_assert!((s.sigma_plus[0] - (-1.0 / c + expected)).abs() < 1e-12 * (1.0 / c + expected));
    }
}

#[test]
fn lambda_log_space_agrees_with_direct() {
    for (a, c) in [(2.5, 1.0), (-3.0, 0.5), (7.0, -2.0)] {
        let fast = series::lambda_coeffs_f64(a, c, 24).unwrap();
        let exact = series::lambda_coeffs(&a, &c, 24).unwrap();
        for (f, e) in fast.iter().zip(&exact) {
            assert!((f - e).abs() <= 1e-12 * e.abs());
        }
    }
    assert!(series::lambda_coeffs_f64(1.0, 0.0, 3).is_err());
}

#[test]
fn lambda_closed_form_exact() {
    let (a, c) = (q(5, 2), q(3, 7));
    let lambda = series::lambda_coeffs(&a, &c, 8).unwrap();
    for (n, l) in lambda.iter().enumerate() {
        let sign = if n % 2 == 0 { -1 } else { 1 };
        let expected = q(sign, n as i64 + 1) * a.pow(n as i32) / c.pow(n as i32 + 1);
        assert_eq!(*l, expected);
    }
}

#[test]
fn sigma_on_the_critical_product_vanishes_on_one_branch() {
    // θ₁θ₂θ₃ = C²/D with C = 1, D = 1
    let s = SeriesCoeffs::build(1.0, 1.0, 1.0, [1.0, 2.0, 0.5], 4).unwrap();
    assert!(s.sigma_plus[0].abs() < 1e-15);
    assert!((s.sigma_minus[0] + 2.0).abs() < 1e-15);
    // with C < 0 the zero moves to the other branch
    let s = SeriesCoeffs::build(1.0, -1.0, 1.0, [1.0, 2.0, 0.5], 4).unwrap();
    assert!(s.sigma_minus[0].abs() < 1e-15);
}

#[test]
fn sigma_limits() {
    let lambda = vec![q(1, 1), q(-1, 2), q(1, 3)];
    let zero = vec![BigRational::zero(); 3];
    let (p, m) = series::sigma_coeffs(&lambda, &zero, &q(1, 1), 3).unwrap();
    assert_eq!(p, lambda);
    assert_eq!(m, lambda);
    let mu = vec![q(2, 1), q(3, 1), q(5, 1)];
    let (p, m) = series::sigma_coeffs(&zero, &mu, &q(1, 1), 3).unwrap();
    assert_eq!(p, vec![q(2, 1), q(3, 2), q(5, 3)]);
    assert!(p.iter().zip(&m).all(|(a, b)| *a == -b.clone()));
    assert!(series::sigma_coeffs(&lambda, &mu, &q(1, 1), 4).is_err());
}

#[test]
fn double_root_scenario_sigma_one() {
    let s = SeriesCoeffs::build(
        2.5,
        1.0,
        1.0 / 3.0,
        [5.464101615137754, 0.2679491924311226, 0.2679491924311226],
        6,
    )
    .unwrap();
    let root = 1.0 / (s.d * s.theta.iter().product::<f64>()).sqrt();
    assert!((s.sigma_plus[0] - (-1.0 + root)).abs() < 1e-12);
    assert!((s.sigma_minus[0] - (-1.0 - root)).abs() < 1e-12);
    assert!(s.sigma(Branch::Plus)[0] != 0.0 && s.sigma(Branch::Minus)[0] != 0.0);
    assert!((s.x_radius() - 0.2679491924311226_f64.min(1.0 / 2.5)).abs() < 1e-12);
}
