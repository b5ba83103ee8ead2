//! Analytic series solutions for the three-compartment blockchain
//! virus-propagation model, paired with independent numerical oracles.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`model`]: the ODE system, a fixed-step RK4 reference integrator and
//!   the conservation diagnostic.
//! * [`reduction`]: Liénard and Abel coefficients, the cubic under the
//!   radical, and residual checkers for both reduced equations.
//! * [`cubic`]: Tschirnhaus depression, Cardano root, quadratic deflation
//!   and the shifts θₖ.
//! * [`series`]: generalized binomials, the μ/λ coefficient families and
//!   their σ± assembly.
//! * [`reversion`]: partition enumeration and series reversion, with an
//!   independent coefficient-matching oracle.
//! * [`solution`]: constant fitting, the assembled x₁/x₂/x₃ series and the
//!   residual report.
//!
//! Coefficient arithmetic is generic over [`Scalar`], implemented for `f64`
//! and for exact [`BigRational`](num_rational::BigRational) values.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > y)` deliberately treats NaN as failing

pub mod cubic;
pub mod error;
pub mod model;
pub mod poly;
pub mod reduction;
pub mod reversion;
pub mod scalar;
pub mod series;
pub mod solution;

pub use error::{Error, Result, Stage};
pub use model::{ModelParams, State, Trajectory};
pub use scalar::Scalar;
pub use solution::{Branch, SeriesSolution};
