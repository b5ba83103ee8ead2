//! Roots of P(x₁) = D·x₁³ + E·x₁² + F·x₁ + G and the shifts θₖ with
//! P(x₁) = D·(x₁+θ₁)(x₁+θ₂)(x₁+θ₃).
//!
//! The shift y = x₁ + E/(3D) gives the depressed form y³ + H·y + I. One real
//! root comes from Cardano's formula (needs Δ₁ = I² + 4H³/27 ≥ 0), the other
//! two from the quadratic factor y² + y₁·y + (y₁² + H). For Δ₁ < 0 the
//! cosine parametrization is available as an opt-in fallback.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduction::CubicData;
use crate::scalar::Scalar;

/// Relative band around zero inside which a discriminant counts as zero.
pub const DISCRIMINANT_SNAP: f64 = 1e-12;
/// Residual bound on the depressed cubic after refinement, times `1+|H|+|I|`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Accepted residual bound at multiple roots where Newton stalls.
pub const LOOSE_RESIDUAL_TOL: f64 = 1e-6;
const MAX_NEWTON_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepressedCubic<T = f64> {
    pub h: T,
    pub i: T,
    pub delta1: T,
    /// E/(3D), the Tschirnhaus shift.
    pub shift: T,
}

impl<T: Scalar> DepressedCubic<T> {
    pub fn eval(&self, y: T) -> T {
        (y.clone() * y.clone() + self.h.clone()) * y + self.i.clone()
    }

    pub fn eval_derivative(&self, y: T) -> T {
        T::from_i64(3) * y.clone() * y + self.h.clone()
    }
}

impl DepressedCubic<f64> {
    pub fn scale(&self) -> f64 {
        1.0 + self.h.abs() + self.i.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootMethod {
    Cardano,
    Trigonometric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicRoots {
    /// Real roots of the depressed cubic, ascending.
    pub y: [f64; 3],
    /// The root produced by Cardano's formula (or the largest trig root).
    pub primary: f64,
    pub delta2: f64,
    pub theta: [f64; 3],
    pub method: RootMethod,
    /// True when a multiple root was only refined to the loose tolerance.
    pub loose: bool,
}

impl CubicRoots {
    /// Roots of P itself, `yₖ − E/(3D)`.
    pub fn x_roots(&self) -> [f64; 3] {
        self.theta.map(|t| -t)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CubicOptions {
    /// Use the cosine parametrization when Δ₁ < 0.
    pub trig_fallback: bool,
}

/// Tschirnhaus shift to y³ + H·y + I.
pub fn depress<T: Scalar>(cd: &CubicData<T>) -> Result<DepressedCubic<T>> {
    let (d, e, f, g) = (cd.d.clone(), cd.e.clone(), cd.f.clone(), cd.g.clone());
    if d.is_zero() || !d.is_finite() {
        return Err(Error::DegenerateCubic(d.to_f64()));
    }
    let n = T::from_i64;
    let h = (n(3) * d.clone() * f.clone() - e.clone() * e.clone()) / (n(3) * d.clone() * d.clone());
    let i = (n(2) * e.clone().powi(3) - n(9) * d.clone() * e.clone() * f
        + n(27) * d.clone().powi(2) * g)
        / (n(27) * d.clone().powi(3));
    let delta1 = i.clone() * i.clone() + n(4) * h.clone().powi(3) / n(27);
    let shift = e / (n(3) * d);
    Ok(DepressedCubic {
        h,
        i,
        delta1,
        shift,
    })
}

fn snapped(value: f64, scale: f64) -> f64 {
    if value.abs() <= DISCRIMINANT_SNAP * scale {
        0.0
    } else {
        value
    }
}

fn delta1_scale(dc: &DepressedCubic) -> f64 {
    dc.i * dc.i + 4.0 * dc.h.abs().powi(3) / 27.0
}

/// Real root y = ∛((−I−√Δ₁)/2) + ∛((−I+√Δ₁)/2) with the sign-preserving cube root.
pub fn cardano_root(dc: &DepressedCubic) -> Result<f64> {
    let delta1 = snapped(dc.delta1, delta1_scale(dc));
    if delta1 < 0.0 {
        return Err(Error::NegativeDiscriminant { delta1: dc.delta1 });
    }
    let sq = delta1.sqrt();
    Ok(((-dc.i - sq) / 2.0).cbrt() + ((-dc.i + sq) / 2.0).cbrt())
}

/// Roots of y² + y₁·y + (y₁² + H), with Δ₂ = y₁² − 4(H + y₁²).
pub fn remaining_roots(y1: f64, h: f64) -> Result<(f64, f64)> {
    let raw = y1 * y1 - 4.0 * (h + y1 * y1);
    let delta2 = snapped(raw, 3.0 * y1 * y1 + 4.0 * h.abs());
    if delta2 < 0.0 {
        return Err(Error::ComplexPair {
            delta2: raw,
            re: -y1 / 2.0,
            im: (-raw).sqrt() / 2.0,
        });
    }
    let sq = delta2.sqrt();
    Ok(((-y1 - sq) / 2.0, (-y1 + sq) / 2.0))
}

/// All three roots by the cosine parametrization; requires H < 0 and Δ₁ ≤ 0.
pub fn trig_roots(dc: &DepressedCubic) -> Result<[f64; 3]> {
    let delta1 = snapped(dc.delta1, delta1_scale(dc));
    if delta1 > 0.0 {
        return Err(Error::Domain(format!(
            "trigonometric method needs Δ₁ ≤ 0, got {:e}",
            dc.delta1
        )));
    }
    if dc.h == 0.0 {
        // Δ₁ ≤ 0 with H = 0 forces I = 0: triple root at zero.
        return Ok([0.0; 3]);
    }
    let m = 2.0 * (-dc.h / 3.0).sqrt();
    let arg = (3.0 * dc.i / (2.0 * dc.h) * (-3.0 / dc.h).sqrt()).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    Ok([0, 1, 2].map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos()))
}

/// Newton polish of each root, at most five steps per root.
///
/// Returns the refined roots and whether any root needed the loose
/// multiple-root tolerance.
pub fn refine_roots(dc: &DepressedCubic, raw: [f64; 3]) -> Result<([f64; 3], bool)> {
    let tol = ROOT_RESIDUAL_TOL * dc.scale();
    let mut loose = false;
    let mut out = raw;
    for r in out.iter_mut() {
        if !r.is_finite() {
            return Err(Error::RefinementFailed {
                root: *r,
                residual: f64::NAN,
            });
        }
        let mut y = *r;
        for _ in 0..MAX_NEWTON_STEPS {
            let f = dc.eval(y);
            let fp = dc.eval_derivative(y);
            if f == 0.0 || fp == 0.0 {
                break;
            }
            let step = f / fp;
            let next = y - step;
            if !next.is_finite() || dc.eval(next).abs() > f.abs() {
                break;
            }
            y = next;
            if step.abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
                break;
            }
        }
        let residual = dc.eval(y).abs();
        if residual > tol {
            if let Some(b) = bisect_near(dc, y, tol) {
                y = b;
            } else if residual <= LOOSE_RESIDUAL_TOL * dc.scale() {
                loose = true;
            } else {
                return Err(Error::RefinementFailed { root: y, residual });
            }
        }
        *r = y;
    }
    Ok((out, loose))
}

/// Bisection on a sign-change bracket around `y`, if one exists nearby.
fn bisect_near(dc: &DepressedCubic, y: f64, tol: f64) -> Option<f64> {
    let mut width = 1e-8 * (1.0 + y.abs());
    while width <= 1e-2 * (1.0 + y.abs()) {
        let (mut lo, mut hi) = (y - width, y + width);
        let (mut flo, fhi) = (dc.eval(lo), dc.eval(hi));
        if flo.signum() != fhi.signum() {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = dc.eval(mid);
                if fm.abs() <= tol || hi - lo <= f64::EPSILON * mid.abs() {
                    return Some(mid);
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        width *= 10.0;
    }
    None
}

/// θₖ = E/(3D) − yₖ; each must be away from zero.
pub fn thetas(roots: [f64; 3], shift: f64) -> Result<[f64; 3]> {
    let tol = 1e-12 * (1.0 + shift.abs());
    let mut out = [0.0; 3];
    for (k, y) in roots.iter().enumerate() {
        let theta = shift - y;
        if theta.abs() <= tol {
            return Err(Error::ZeroShift {
                index: k + 1,
                theta,
            });
        }
        out[k] = theta;
    }
    Ok(out)
}

/// Full root pipeline: depress, Cardano (or trig fallback), deflate, refine,
/// sort and shift.
pub fn solve_cubic(cd: &CubicData, opts: CubicOptions) -> Result<(DepressedCubic, CubicRoots)> {
    let dc = depress(cd)?;
    let (raw, primary, method) = match cardano_root(&dc) {
        Ok(y1) => {
            let (y2, y3) = remaining_roots(y1, dc.h)?;
            ([y1, y2, y3], y1, RootMethod::Cardano)
        }
        Err(Error::NegativeDiscriminant { .. }) if opts.trig_fallback => {
            let ys = trig_roots(&dc)?;
            (ys, ys[0], RootMethod::Trigonometric)
        }
        Err(e) => return Err(e),
    };
    let (mut y, loose) = refine_roots(&dc, raw)?;
    y.sort_by(f64::total_cmp);
    let primary = y
        .iter()
        .copied()
        .min_by(|a, b| (a - primary).abs().total_cmp(&(b - primary).abs()))
        .unwrap_or(primary);
    let delta2 = primary * primary - 4.0 * (dc.h + primary * primary);
    let theta = thetas(y, dc.shift)?;
    Ok((
        dc,
        CubicRoots {
            y,
            primary,
            delta2,
            theta,
            method,
            loose,
        },
    ))
}

/// Expands D·(x+θ₁)(x+θ₂)(x+θ₃) into `[D, E, F, G]`.
pub fn expand_from_thetas(d: f64, theta: [f64; 3]) -> [f64; 4] {
    let [a, b, c] = theta;
    [
        d,
        d * (a + b + c),
        d * (a * b + a * c + b * c),
        d * a * b * c,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn depressed(h: f64, i: f64) -> DepressedCubic {
        depress(&CubicData::from_coefficients(1.0, 0.0, h, i)).unwrap()
    }

    #[test]
    fn already_depressed_is_unchanged() {
        let dc = depressed(-2.5, 0.75);
        assert_eq!((dc.h, dc.i, dc.shift), (-2.5, 0.75, 0.0));
    }

    #[test]
    fn perfect_cube_depresses_to_zero() {
        let dc = depress(&CubicData::from_coefficients(1.0, 3.0, 3.0, 1.0)).unwrap();
        assert_eq!((dc.h, dc.i), (0.0, 0.0));
        assert_eq!(dc.shift, 1.0);
    }

    #[test]
    fn reduction_example_depressed_exactly() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let cd = CubicData::from_coefficients(q(1, 3), q(-3, 2), q(1, 1), q(0, 1));
        let dc = depress(&cd).unwrap();
        assert_eq!(dc.h, q(-15, 4));
        // I = (2E³ − 9DEF + 27D²G)/(27D³) = (−27/4 + 9/2)/1 = −9/4
        assert_eq!(dc.i, q(-9, 4));
        // P(x) = D·P̃(x + E/(3D)) at three probes
        for x in [q(-2, 1), q(1, 3), q(5, 2)] {
            let y = x.clone() + dc.shift.clone();
            assert_eq!(cd.eval(x), cd.d.clone() * dc.eval(y));
        }
    }

    #[test]
    fn zero_leading_coefficient_is_degenerate() {
        let err = depress(&CubicData::from_coefficients(0.0, 1.0, 1.0, 1.0)).unwrap_err();
        assert_eq!(err, Error::DegenerateCubic(0.0));
    }

    #[test]
    fn cardano_examples() {
        assert_eq!(cardano_root(&depressed(0.0, -8.0)).unwrap(), 2.0);
        assert_eq!(cardano_root(&depressed(-3.0, 2.0)).unwrap(), -2.0);
        let err = cardano_root(&depressed(-1.0, 0.0)).unwrap_err();
        match err {
            Error::NegativeDiscriminant { delta1 } => assert!((delta1 + 4.0 / 27.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trig_fallback_on_casus_irreducibilis() {
        let mut ys = trig_roots(&depressed(-1.0, 0.0)).unwrap();
        ys.sort_by(f64::total_cmp);
        for (got, want) in ys.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(trig_roots(&depressed(0.0, -8.0)).is_err());
    }

    #[test]
    fn remaining_roots_examples() {
        assert_eq!(remaining_roots(-2.0, -3.0).unwrap(), (1.0, 1.0));
        assert_eq!(remaining_roots(0.0, -1.0).unwrap(), (-1.0, 1.0));
        // y³ − 8: the other two roots are complex.
        match remaining_roots(2.0, 0.0).unwrap_err() {
            Error::ComplexPair { delta2, re, im } => {
                assert_eq!(delta2, -12.0);
                assert_eq!(re, -1.0);
                assert!((im - 3f64.sqrt()).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn refinement_leaves_exact_roots_alone() {
        let dc = depressed(-1.0, 0.0);
        let (r, loose) = refine_roots(&dc, [-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r, [-1.0, 0.0, 1.0]);
        assert!(!loose);
    }

    #[test]
    fn refinement_restores_perturbed_root() {
        let dc = depressed(-1.0, 0.0);
        let (r, _) = refine_roots(&dc, [-1.0, 0.0, 1.0 + 1e-4]).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_accepts_double_root_loosely() {
        // (y − 1)²(y + 2): Newton converges only linearly at y = 1.
        let dc = depressed(-3.0, 2.0);
        let (r, loose) = refine_roots(&dc, [-2.0, 1.0 + 1e-2, 1.0]).unwrap();
        assert!(loose);
        assert!((r[1] - 1.0).abs() < 1e-3);
        assert!(dc.eval(r[1]).abs() <= LOOSE_RESIDUAL_TOL * dc.scale());
    }

    #[test]
    fn refinement_rejects_garbage() {
        let dc = depressed(-1.0, 0.0);
        assert!(matches!(
            refine_roots(&dc, [50.0, 0.0, 1.0]),
            Err(Error::RefinementFailed { .. })
        ));
    }

    #[test]
    fn double_root_pipeline() {
        let (_, roots) = solve_cubic(
            &CubicData::from_coefficients(1.0, 0.0, -3.0, 2.0),
            CubicOptions::default(),
        )
        .unwrap();
        assert_eq!(roots.y, [-2.0, 1.0, 1.0]);
        assert_eq!(roots.method, RootMethod::Cardano);
        assert_eq!(roots.delta2, 0.0);
    }

    #[test]
    fn theta_examples() {
        match thetas([-1.0, 0.0, 1.0], 0.0).unwrap_err() {
            Error::ZeroShift { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(thetas([-1.5; 3], 0.5).unwrap(), [2.0; 3]);
    }

    #[test]
    fn three_real_roots_need_the_fallback() {
        // (x + 1)(x + 2)(x + 3)
        let cd = CubicData::from_coefficients(1.0, 6.0, 11.0, 6.0);
        assert!(matches!(
            solve_cubic(&cd, CubicOptions::default()),
            Err(Error::NegativeDiscriminant { .. })
        ));
        let (_, roots) = solve_cubic(
            &cd,
            CubicOptions {
                trig_fallback: true,
            },
        )
        .unwrap();
        assert_eq!(roots.method, RootMethod::Trigonometric);
        let mut th = roots.theta;
        th.sort_by(f64::total_cmp);
        for (got, want) in th.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
