//! Liénard reduction, Abel transformation and the cubic under the radical.
//!
//! Eliminating x₃ = N − x₁ − x₂ and x₂ = (x₁' + d₁x₁)/b₂ gives
//!
//! ```text
//! a·x₁'' + b·x₁' + c·x₁² + d·x₁ + e = 0
//! ```
//!
//! and dividing by `a` the Liénard form x₁'' + A·x₁' + B(x₁) = 0. With
//! u = x₁' and v = 1/u this becomes the Abel equation dv/dx₁ = A·v² + B(x₁)·v³.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, State, Trajectory};
use crate::scalar::Scalar;

/// Reduction coefficients `a..e`. `B` is kept as the quadratic triple
/// `(c/a, d/a, e/a)` so exact arithmetic stays available downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LienardSystem<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
}

impl<T: Scalar> LienardSystem<T> {
    /// Damping constant `A = b/a`.
    pub fn damping(&self) -> T {
        self.b.clone() / self.a.clone()
    }

    /// Coefficients of B(x₁) = β₂x₁² + β₁x₁ + β₀, returned as (β₂, β₁, β₀).
    pub fn restoring(&self) -> (T, T, T) {
        (
            self.c.clone() / self.a.clone(),
            self.d.clone() / self.a.clone(),
            self.e.clone() / self.a.clone(),
        )
    }

    pub fn restoring_at(&self, x1: T) -> T {
        let (q2, q1, q0) = self.restoring();
        (q2 * x1.clone() + q1) * x1 + q0
    }

    pub fn abel(&self) -> AbelEquation<T> {
        AbelEquation {
            damping: self.damping(),
            restoring: self.restoring(),
        }
    }
}

impl LienardSystem<f64> {
    /// Residual x₁'' + A·x₁' + B(x₁) at a single point.
    pub fn residual(&self, x1: f64, dx1: f64, ddx1: f64) -> f64 {
        ddx1 + self.damping() * dx1 + self.restoring_at(x1)
    }
}

/// dv/dx₁ = A·v² + B(x₁)·v³, with v = 1/(dx₁/dt).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelEquation<T = f64> {
    pub damping: T,
    pub restoring: (T, T, T),
}

impl AbelEquation<f64> {
    pub fn restoring_at(&self, x1: f64) -> f64 {
        let (q2, q1, q0) = self.restoring;
        (q2 * x1 + q1) * x1 + q0
    }
}

/// Coefficients of P(x₁) = D·x₁³ + E·x₁² + F·x₁ + G together with the
/// integration constants they came from. `G = −2·C″ + C′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicData<T = f64> {
    pub d: T,
    pub e: T,
    pub f: T,
    pub g: T,
    pub c: T,
    pub cp: T,
    pub cpp: T,
}

impl<T: Scalar> CubicData<T> {
    /// Builds a quartet directly, bypassing the reduction. Integration
    /// constants are set to C = 1, C′ = G, C″ = 0.
    pub fn from_coefficients(d: T, e: T, f: T, g: T) -> Self {
        CubicData {
            d,
            e,
            f,
            cp: g.clone(),
            g,
            c: T::one(),
            cpp: T::zero(),
        }
    }

    pub fn eval(&self, x: T) -> T {
        ((self.d.clone() * x.clone() + self.e.clone()) * x.clone() + self.f.clone()) * x
            + self.g.clone()
    }

    pub fn eval_derivative(&self, x: T) -> T {
        (T::from_i64(3) * self.d.clone() * x.clone() + T::from_i64(2) * self.e.clone()) * x
            + self.f.clone()
    }

    pub fn coefficients(&self) -> [T; 4] {
        [
            self.d.clone(),
            self.e.clone(),
            self.f.clone(),
            self.g.clone(),
        ]
    }
}

/// Liénard coefficients of the model.
pub fn lienard_coeffs<T: Scalar>(p: &ModelParams<T>) -> LienardSystem<T> {
    let ModelParams {
        d1,
        d2,
        d3,
        b1,
        b2,
        k1,
        k2,
        n,
    } = p.clone();
    let a = (k1.clone() + k2.clone()) / b2.clone();
    let b = k2.clone()
        + (k1.clone() * (d1.clone() + d2.clone()) + k2.clone() * (d1.clone() + d3.clone()))
            / b2.clone();
    let c = -(k1.clone() * k2.clone());
    let d = -(b1 * k1.clone())
        + k2.clone() * (d3.clone() + k1.clone() * n.clone())
        + d1 * (d2 * k1 + d3.clone() * k2.clone()) / b2;
    let e = -(d3 * k2 * n);
    LienardSystem { a, b, c, d, e }
}

/// The two-dimensional system left after substituting x₃ = N − x₁ − x₂.
pub fn closed_system_rhs(p: &ModelParams, x1: f64, x2: f64) -> (f64, f64) {
    (
        -p.d1 * x1 + p.b2 * x2,
        (p.b1 - p.k2 * p.n) * x1 + p.k2 * x1 * x1 - p.d2 * x2 + p.k2 * x1 * x2,
    )
}

/// First and second time derivatives of x₁ along the closed system, by the
/// chain rule on its right-hand side.
pub fn closed_system_derivatives(p: &ModelParams, x1: f64, x2: f64) -> (f64, f64) {
    let (dx1, dx2) = closed_system_rhs(p, x1, x2);
    (dx1, -p.d1 * dx1 + p.b2 * dx2)
}

/// RK4 on the closed system. The returned trajectory stores x₃ = N − x₁ − x₂.
pub fn integrate_closed(
    p: &ModelParams,
    x1_0: f64,
    x2_0: f64,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    p.validate()?;
    let n = p.n;
    let mut traj = model::integrate_field(
        |s: &State| {
            let (a, b) = closed_system_rhs(p, s.x1, s.x2);
            State::new(a, b, -a - b)
        },
        State::new(x1_0, x2_0, n - x1_0 - x2_0),
        t0,
        t_end,
        h,
        "rk4-closed",
    )?;
    for (_, s) in traj.samples.iter_mut() {
        s.x3 = n - s.x1 - s.x2;
    }
    Ok(traj)
}

/// Liénard residual x₁'' + A·x₁' + B(x₁) for each `(t, x₁, x₁', x₁'')` sample.
pub fn lienard_residual(ls: &LienardSystem, samples: &[(f64, f64, f64, f64)]) -> Vec<f64> {
    samples
        .iter()
        .map(|&(_, x1, dx1, ddx1)| ls.residual(x1, dx1, ddx1))
        .collect()
}

/// Largest absolute term of the Liénard equation at one sample; used to
/// scale residuals into relative form.
pub fn lienard_term_scale(ls: &LienardSystem, x1: f64, dx1: f64, ddx1: f64) -> f64 {
    let (q2, q1, q0) = ls.restoring();
    [
        ddx1.abs(),
        (ls.damping() * dx1).abs(),
        (q2 * x1 * x1).abs(),
        (q1 * x1).abs(),
        q0.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Samples `(t, x₁, x₁', x₁'')` along a closed-system trajectory.
pub fn closed_lienard_samples(p: &ModelParams, traj: &Trajectory) -> Vec<(f64, f64, f64, f64)> {
    traj.samples
        .iter()
        .map(|(t, s)| {
            let (dx1, ddx1) = closed_system_derivatives(p, s.x1, s.x2);
            (*t, s.x1, dx1, ddx1)
        })
        .collect()
}

/// A·v² + B(x₁)·v³.
pub fn abel_rhs(ae: &AbelEquation, x1: f64, v: f64) -> f64 {
    ae.damping * v * v + ae.restoring_at(x1) * v * v * v
}

/// D = −2c/(3a), E = −d/a, F = −2e/a, G = −2·C″ + C′.
pub fn cubic_from_abel<T: Scalar>(
    ls: &LienardSystem<T>,
    c: T,
    cp: T,
    cpp: T,
) -> Result<CubicData<T>> {
    if c.is_zero() {
        return Err(Error::InvalidConstant(
            "C must be nonzero: the logarithmic series expands around x₁ = 0".into(),
        ));
    }
    if !c.is_finite() || !cp.is_finite() || !cpp.is_finite() {
        return Err(Error::InvalidConstant("constants must be finite".into()));
    }
    let two = T::from_i64(2);
    let three = T::from_i64(3);
    Ok(CubicData {
        d: -(two.clone() * ls.c.clone()) / (three * ls.a.clone()),
        e: -ls.d.clone() / ls.a.clone(),
        f: -(two.clone() * ls.e.clone()) / ls.a.clone(),
        g: -(two * cpp.clone()) + cp.clone(),
        c,
        cp,
        cpp,
    })
}
