mod common;

use abelprop::reduction;
use abelprop::scalar::rational_from_f64;
use abelprop::series::Branch;
use abelprop::solution::{self, FamilyClass, ResidualFamily, SolveOptions, ValidateOptions};
use abelprop::{Error, ModelParams, Stage, State};
use num_rational::BigRational;
use num_traits::Zero;

use common::{double_root_scenario, q};

fn solved() -> (ModelParams, State, solution::SeriesSolution) {
    let (p, s0) = double_root_scenario();
    let sol = solution::solve_series(&p, &s0, 0.0, &SolveOptions::default()).unwrap();
    (p, s0, sol)
}

#[test]
fn fit_reproduces_initial_velocity() {
    let ones = ModelParams::uniform(1.0).unwrap();
    let s0 = State::new(0.2, 0.4, 0.4);
    let fit = solution::fit_constants_any_branch(&ones, &s0, 0.0, 1.0).unwrap();
    assert!((fit.v0 - 5.0).abs() < 1e-14);
    assert_eq!(fit.branch, Branch::Plus);
    assert_eq!((fit.cp, fit.cpp), (fit.g, 0.0));
    // the fitted v(x₁⁰) on the selected branch is 1/(dx₁/dt)
    let ls = reduction::lienard_coeffs(&ones);
    let cd = reduction::cubic_from_abel(&ls, 1.0, fit.g, 0.0).unwrap();
    assert!((solution::abel_solution(&ls, &cd, fit.branch, 0.2) - 5.0).abs() < 1e-12);
    let err = solution::fit_constants(&ones, &s0, 0.0, 1.0, Branch::Minus).unwrap_err();
    assert!(matches!(
        err,
        Error::BranchMismatch {
            requested: '-',
            matched: '+'
        }
    ));
}

#[test]
fn zero_velocity_is_an_error() {
    let ones = ModelParams::uniform(1.0).unwrap();
    let s0 = State::new(0.3, 0.3, 0.4);
    assert!(matches!(
        solution::fit_constants_any_branch(&ones, &s0, 0.0, 1.0),
        Err(Error::ZeroVelocity)
    ));
}

#[test]
fn fitted_cubic_exact_matches_float() {
    let ones = ModelParams::uniform(q(1, 1)).unwrap();
    let (cd, w) = solution::fitted_cubic(&ones, &q(1, 5), &q(2, 5), q(1, 1)).unwrap();
    // w = 5 + 1/(5/2·1/5 + 1) = 17/3, G = 9/289 − P₀(1/5)
    assert_eq!(w, q(17, 3));
    let p0 = q(1, 3) * q(1, 125) - q(3, 2) * q(1, 25) + q(1, 5);
    assert_eq!(cd.g, q(9, 289) - p0);
}

#[test]
fn all_ones_scenario_has_no_positive_factorization() {
    let ones = ModelParams::uniform(1.0).unwrap();
    let err = solution::solve_series(
        &ones,
        &State::new(0.2, 0.4, 0.4),
        0.0,
        &SolveOptions::default(),
    )
    .unwrap_err();
    assert!(
        matches!(err.stage(), Some(Stage::Cubic) | Some(Stage::Series)),
        "{err}"
    );
}

#[test]
fn branch_mismatch_is_tagged_as_assembly() {
    let (p, s0) = double_root_scenario();
    let opts = SolveOptions {
        branch: Branch::Minus,
        ..SolveOptions::default()
    };
    let err = solution::solve_series(&p, &s0, 0.0, &opts).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Assembly));
    assert!(matches!(err.root(), Error::BranchMismatch { .. }));
}

#[test]
fn series_hits_the_initial_state() {
    let (_, s0, sol) = solved();
    assert_eq!(sol.x1[0], 0.0);
    assert_eq!(sol.x1.len(), 25);
    let at_t0 = solution::evaluate(&sol, 0.0);
    assert!((at_t0.x1 - s0.x1).abs() < 1e-12);
    assert!(at_t0.max_abs_diff(&s0) < 1e-9, "{at_t0:?}");
    assert_eq!(solution::evaluate(&sol, sol.t_off()).x1, 0.0);
    assert!(sol.inside_radius(0.0));
    assert!((sol.tau0 + sol.t_off()).abs() < 1e-15);
}

#[test]
fn coefficient_identities_hold_exactly() {
    let (p, _, sol) = solved();
    let x1: Vec<BigRational> = sol
        .x1
        .iter()
        .map(|c| rational_from_f64(*c).unwrap())
        .collect();
    let (d1, b2, n) = [p.d1, p.b2, p.n]
        .map(|v| rational_from_f64(v).unwrap())
        .into();
    let x2 = solution::recover_x2(&x1, &d1, &b2);
    let x3 = solution::recover_x3(&x1, &x2, &n);
    for k in 0..x1.len() {
        let next = x1.get(k + 1).cloned().unwrap_or_else(BigRational::zero);
        assert_eq!(
            x2[k].clone() * b2.clone(),
            q(k as i64 + 1, 1) * next + d1.clone() * x1[k].clone()
        );
        let total = x1[k].clone() + x2[k].clone() + x3[k].clone();
        assert_eq!(
            total,
            if k == 0 {
                n.clone()
            } else {
                BigRational::zero()
            }
        );
    }
}

#[test]
fn solve_is_deterministic() {
    let (_, _, a) = solved();
    let (_, _, b) = solved();
    assert_eq!(a, b);
}

#[test]
fn exact_reversion_agrees_with_float() {
    let (p, s0, float) = solved();
    let opts = SolveOptions {
        exact_reversion: true,
        ..SolveOptions::default()
    };
    let exact = solution::solve_series(&p, &s0, 0.0, &opts).unwrap();
    for (a, b) in float.rho().iter().zip(exact.rho()) {
        assert!(
            (a - b).abs() <= 4.0 * f64::EPSILON * b.abs(),
            "{a:e} vs {b:e}"
        );
    }
}

#[test]
fn branch_symmetry() {
    let (_, _, sol) = solved();
    let s = &sol.series;
    for n in 0..s.order {
        let lam = s.lambda[n];
        assert!(
            ((s.sigma_plus[n] - lam) + (s.sigma_minus[n] - lam)).abs() < 1e-12 * lam.abs().max(1.0)
        );
    }
    for branch in [Branch::Plus, Branch::Minus] {
        let sigma = s.sigma(branch);
        let rho = abelprop::reversion::revert(sigma, s.order).unwrap();
        let worst = solution::relative_composition_residual(sigma, &rho, s.order)
            .into_iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        assert!(worst < 1e-9, "{branch:?}: {worst}");
    }
}

#[test]
fn radius_examples() {
    assert!((solution::radius_estimate(&[1.0; 24]).unwrap() - 1.0).abs() < 1e-9);
    let halves: Vec<f64> = (1..=24).map(|n| 0.5f64.powi(n)).collect();
    assert!((solution::radius_estimate(&halves).unwrap() - 2.0).abs() < 1e-9);
    let mut catalan = vec![1.0f64];
    for n in 1..24 {
        let prev = catalan[n - 1];
        catalan.push(-prev * (2.0 * (2 * n - 1) as f64) / (n + 1) as f64);
    }
    let r = solution::radius_estimate(&catalan).unwrap();
    assert!((0.22..=0.28).contains(&r), "{r}");
    let mut fact = 1.0;
    let superexp: Vec<f64> = (1..=20)
        .map(|n| {
            fact *= n as f64;
            1.0 / fact
        })
        .collect();
    assert_eq!(solution::radius_estimate(&superexp).unwrap(), f64::INFINITY);
    assert!(matches!(
        solution::radius_estimate(&[1.0, 0.0, 2.0]),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn align_time_examples() {
    let x1 = [0.0, 1.0];
    assert_eq!(solution::align_time(&x1, 0.0, 1.0).unwrap(), 0.0);
    assert!((solution::align_time(&x1, 0.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((solution::align_time(&x1, -0.25, 1.0).unwrap() + 0.25).abs() < 1e-15);
    assert!(matches!(
        solution::align_time(&x1, 2.0, 1.0),
        Err(Error::TimeAlignment(_))
    ));
    assert!(matches!(
        solution::align_time(&[0.0, 0.0, 1.0], 1.0, 1.0),
        Err(Error::TimeAlignment(_))
    ));
}

#[test]
fn abel_decomposition_matches_expansion() {
    let (_, _, sol) = solved();
    let grid: Vec<f64> = (0..101).map(|i| 0.002 * i as f64).collect();
    let reports = solution::abel_decomposition_residual(&sol.lienard, &sol.cubic, &grid).unwrap();
    for r in &reports {
        assert_eq!(r.points.len(), 101);
        assert!(
            r.v1_max < 1e-10 && r.v2_max < 1e-10,
            "{} {}",
            r.v1_max,
            r.v2_max
        );
        assert!(r.cross_term_mismatch < 1e-9, "{}", r.cross_term_mismatch);
        assert!(r.composite_max > 1e-3);
    }
    assert_eq!(reports[0].branch, Branch::Plus);
    assert_eq!(reports[1].branch, Branch::Minus);
}

#[test]
fn abel_decomposition_domain() {
    let (_, _, sol) = solved();
    // left of the simple root −2 − 2√3 the cubic is negative
    let bad = [-6.0];
    assert!(solution::abel_decomposition_residual(&sol.lienard, &sol.cubic, &bad).is_err());
    assert!(solution::abel_decomposition_residual(&sol.lienard, &sol.cubic, &[-0.4]).is_err());
}

#[test]
fn validate_report_structure() {
    let (p, s0, sol) = solved();
    let horizon = 0.1 * sol.radius - sol.tau0;
    let report = solution::validate(&sol, &p, &s0, horizon, &ValidateOptions::default()).unwrap();
    let names: Vec<&str> = report.families.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(
        names,
        [
            solution::FAMILY_SYSTEM,
            solution::FAMILY_LIENARD,
            solution::FAMILY_ABEL,
            solution::FAMILY_DRIFT,
            solution::FAMILY_DEVIATION,
            solution::FAMILY_COMPOSITION,
            solution::FAMILY_CLOSED,
            solution::FAMILY_LIENARD_DRIFT,
        ]
    );
    for f in &report.families {
        assert!(!f.samples.is_empty());
        if f.name != solution::FAMILY_COMPOSITION {
            assert_eq!(f.samples.len(), solution::GRID_POINTS, "{}", f.name);
        }
    }
    assert!(report.hard_pass, "{:#?}", report.families);
    assert!(report.deviation_within_tenth_radius.unwrap().is_finite());
    assert_eq!(report.outside_radius, 0);
    let closed = report.family(solution::FAMILY_CLOSED).unwrap();
    assert!(closed.max < 1e-6);
    assert!(solution::validate(&sol, &p, &s0, 0.0, &ValidateOptions::default()).is_err());
}

#[test]
fn verdict_flips_at_the_tolerance() {
    let samples = vec![(0.0, 1e-7), (1.0, -3e-7), (2.0, 2e-7)];
    let fam = ResidualFamily::new("x", FamilyClass::Diagnostic, samples, 3e-7);
    assert_eq!(fam.max, 3e-7);
    assert!(fam.pass);
    assert!(!fam.clone().with_tolerance(2.9999999e-7).pass);
    assert!(fam.with_tolerance(f64::INFINITY).pass);
    let nan = ResidualFamily::new("y", FamilyClass::Hard, vec![(0.0, f64::NAN)], f64::INFINITY);
    assert!(!nan.pass);
}
