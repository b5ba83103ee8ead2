//! The three-compartment system, its RK4 reference integrator and the
//! conservation diagnostic.
//!
//! ```text
//! x₁' = −d₁x₁ + b₂x₂
//! x₂' =  b₁x₁ − d₂x₂ − k₂x₁x₃
//! x₃' = −d₃x₃ + k₁x₁x₂
//! ```
//!
//! x₁ is the virus level, x₂ and x₃ the protected and unprotected systems.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rate constants of the model plus the total population `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams<T = f64> {
    pub d1: T,
    pub d2: T,
    pub d3: T,
    pub b1: T,
    pub b2: T,
    pub k1: T,
    pub k2: T,
    pub n: T,
}

impl<T: Scalar> ModelParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(d1: T, d2: T, d3: T, b1: T, b2: T, k1: T, k2: T, n: T) -> Result<Self> {
        let p = ModelParams {
            d1,
            d2,
            d3,
            b1,
            b2,
            k1,
            k2,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Every parameter set to `v`.
    pub fn uniform(v: T) -> Result<Self> {
        Self::new(
            v.clone(),
            v.clone(),
            v.clone(),
            v.clone(),
            v.clone(),
            v.clone(),
            v.clone(),
            v,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !value.is_finite() || *value <= T::zero() {
                return Err(Error::Domain(format!(
                    "parameter {name} must be finite and strictly positive, got {value:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, &T); 8] {
        [
            ("d1", &self.d1),
            ("d2", &self.d2),
            ("d3", &self.d3),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("k1", &self.k1),
            ("k2", &self.k2),
            ("N", &self.n),
        ]
    }

    pub fn to_f64(&self) -> ModelParams<f64> {
        ModelParams {
            d1: self.d1.to_f64(),
            d2: self.d2.to_f64(),
            d3: self.d3.to_f64(),
            b1: self.b1.to_f64(),
            b2: self.b2.to_f64(),
            k1: self.k1.to_f64(),
            k2: self.k2.to_f64(),
            n: self.n.to_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        State { x1, x2, x3 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn total(&self) -> f64 {
        self.x1 + self.x2 + self.x3
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }

    /// Initial-data check: finite and componentwise non-negative.
    pub fn check_initial(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::Domain(format!(
                "initial state is not finite: {self:?}"
            )));
        }
        if self.x1 < 0.0 || self.x2 < 0.0 || self.x3 < 0.0 {
            return Err(Error::Domain(format!(
                "initial state must be non-negative, got ({}, {}, {})",
                self.x1, self.x2, self.x3
            )));
        }
        Ok(())
    }

    fn axpy(&self, h: f64, k: &State) -> State {
        State::new(self.x1 + h * k.x1, self.x2 + h * k.x2, self.x3 + h * k.x3)
    }
}

/// Samples `(t, state)` on a uniform grid starting at t₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub step: f64,
    pub integrator: &'static str,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&(f64, State)> {
        self.samples.last()
    }
}

/// Right-hand side of the system, written exactly as the model states it.
pub fn rhs(p: &ModelParams, s: &State) -> Result<State> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite state {s:?}")));
    }
    Ok(rhs_unchecked(p, s))
}

#[inline]
pub(crate) fn rhs_unchecked(p: &ModelParams, s: &State) -> State {
    State::new(
        -p.d1 * s.x1 + p.b2 * s.x2,
        p.b1 * s.x1 - p.d2 * s.x2 - p.k2 * s.x1 * s.x3,
        -p.d3 * s.x3 + p.k1 * s.x1 * s.x2,
    )
}

/// d/dt (x₁+x₂+x₃) under the system, i.e. the sum of the three rates.
pub fn drift_rate(p: &ModelParams, s: &State) -> f64 {
    rhs_unchecked(p, s).total()
}

/// One classical RK4 step of an autonomous field.
pub(crate) fn rk4_step<F>(f: &F, s: &State, h: f64) -> State
where
    F: Fn(&State) -> State,
{
    let k1 = f(s);
    let k2 = f(&s.axpy(0.5 * h, &k1));
    let k3 = f(&s.axpy(0.5 * h, &k2));
    let k4 = f(&s.axpy(h, &k3));
    State::new(
        s.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        s.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        s.x3 + h / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3),
    )
}

/// Number of uniform steps of size `h` needed to reach `t_end` from `t0`.
pub fn step_count(t0: f64, t_end: f64, h: f64) -> usize {
    (((t_end - t0) / h) - 1e-9).ceil().max(1.0) as usize
}

/// Fixed-step RK4 of an arbitrary autonomous field on the grid `t0 + i·h`.
pub(crate) fn integrate_field<F>(
    f: F,
    s0: State,
    t0: f64,
    t_end: f64,
    h: f64,
    name: &'static str,
) -> Result<Trajectory>
where
    F: Fn(&State) -> State,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    if !(t_end > t0) {
        return Err(Error::Domain(format!(
            "t_end ({t_end}) must exceed t0 ({t0})"
        )));
    }
    if !s0.is_finite() {
        return Err(Error::Domain(format!("non-finite initial state {s0:?}")));
    }
    let steps = step_count(t0, t_end, h);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((t0, s0));
    let mut s = s0;
    let mut warned = false;
    for i in 1..=steps {
        let next = rk4_step(&f, &s, h);
        if !next.is_finite() {
            return Err(Error::IntegrationBlowup {
                last_t: t0 + (i - 1) as f64 * h,
            });
        }
        if !warned && (next.x1 < 0.0 || next.x2 < 0.0 || next.x3 < 0.0) {
            log::warn!(
                "{name}: state left the non-negative octant at t = {}",
                t0 + i as f64 * h
            );
            warned = true;
        }
        s = next;
        samples.push((t0 + i as f64 * h, s));
    }
    Ok(Trajectory {
        samples,
        step: h,
        integrator: name,
    })
}

/// Classical RK4 reference solution of the full three-dimensional system.
pub fn integrate_reference(
    p: &ModelParams,
    s0: State,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    p.validate()?;
    integrate_field(|s| rhs_unchecked(p, s), s0, t0, t_end, h, "rk4")
}

/// Signed deviation `x₁+x₂+x₃ − N` at every sample.
pub fn conservation_drift(traj: &Trajectory, p: &ModelParams) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|(t, s)| (*t, s.total() - p.n))
        .collect()
}
