//! End-to-end series solution and its residual report.
//!
//! The pipeline fits G from the initial velocity, factors P, builds σ±,
//! reverts to x₁(τ) = Σ ρₙ τⁿ and recovers x₂ = (x₁' + d₁x₁)/b₂ and
//! x₃ = N − x₁ − x₂ coefficientwise. Series time τ is zero where x₁ = 0;
//! scenario time is t = τ + t_off.

use num_rational::BigRational;
use serde::Serialize;

use crate::cubic::{self, CubicOptions, CubicRoots, DepressedCubic};
use crate::error::{Error, Result, Stage};
use crate::model::{self, ModelParams, State};
use crate::poly;
use crate::reduction::{self, CubicData, LienardSystem};
use crate::reversion;
use crate::scalar::{self, Scalar};
pub use crate::series::Branch;
use crate::series::{SeriesCoeffs, DEFAULT_ORDER};

/// Number of points in validation grids.
pub const GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub c: f64,
    pub order: usize,
    pub branch: Branch,
    pub trig_fallback: bool,
    /// Run the reversion over exact rationals built from the float σ.
    pub exact_reversion: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            c: 1.0,
            order: DEFAULT_ORDER,
            branch: Branch::Plus,
            trig_fallback: false,
            exact_reversion: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c: f64,
    pub cp: f64,
    pub cpp: f64,
    pub g: f64,
    pub t_off: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedConstants {
    pub c: f64,
    pub cp: f64,
    pub cpp: f64,
    pub g: f64,
    /// 1/(dx₁/dt) at t₀.
    pub v0: f64,
    /// Branch whose sign matches v₀ + (A·x₁⁰ + C)⁻¹.
    pub branch: Branch,
    pub t0: f64,
}

/// dx₁/dt at the initial state.
pub fn initial_velocity(p: &ModelParams, s0: &State) -> f64 {
    -p.d1 * s0.x1 + p.b2 * s0.x2
}

/// The cubic with G fitted so that v(x₁⁰) reproduces the initial velocity,
/// plus `w = v₀ + (A·x₁⁰ + C)⁻¹` whose sign selects the branch.
/// Works over any field; `w⁻²` never needs a square root.
pub fn fitted_cubic<T: Scalar>(
    p: &ModelParams<T>,
    x1_0: &T,
    x2_0: &T,
    c: T,
) -> Result<(CubicData<T>, T)> {
    let velocity = -(p.d1.clone() * x1_0.clone()) + p.b2.clone() * x2_0.clone();
    if velocity.is_zero() {
        return Err(Error::ZeroVelocity);
    }
    let ls = reduction::lienard_coeffs(p);
    let denom = ls.damping() * x1_0.clone() + c.clone();
    if denom.is_zero() {
        return Err(Error::Domain(
            "A·x₁⁰ + C = 0: v₁ is singular at the initial point".into(),
        ));
    }
    let w = T::one() / velocity + T::one() / denom;
    if w.is_zero() {
        return Err(Error::Domain(
            "initial velocity equals the v₁-only velocity; P(x₁⁰) would be infinite".into(),
        ));
    }
    let zero = T::zero();
    let base = reduction::cubic_from_abel(&ls, c.clone(), zero.clone(), zero.clone())?;
    let g = T::one() / (w.clone() * w.clone()) - base.eval(x1_0.clone());
    let cd = reduction::cubic_from_abel(&ls, c, g, zero)?;
    Ok((cd, w))
}

/// Fits G (reported as C′ = G, C″ = 0) from the initial velocity and checks
/// the requested branch against the sign the data selects.
pub fn fit_constants(
    p: &ModelParams,
    s0: &State,
    t0: f64,
    c: f64,
    branch: Branch,
) -> Result<FittedConstants> {
    let fit = fit_constants_any_branch(p, s0, t0, c)?;
    if fit.branch != branch {
        return Err(Error::BranchMismatch {
            requested: branch.symbol(),
            matched: fit.branch.symbol(),
        });
    }
    Ok(fit)
}

/// As [`fit_constants`] but returns whichever branch the data selects.
pub fn fit_constants_any_branch(
    p: &ModelParams,
    s0: &State,
    t0: f64,
    c: f64,
) -> Result<FittedConstants> {
    let velocity = initial_velocity(p, s0);
    let v0 = 1.0 / velocity;
    if velocity == 0.0 || !v0.is_finite() {
        return Err(Error::ZeroVelocity);
    }
    let (cd, w) = fitted_cubic(p, &s0.x1, &s0.x2, c)?;
    if !cd.g.is_finite() {
        return Err(Error::Domain(format!("fitted G is not finite ({})", cd.g)));
    }
    Ok(FittedConstants {
        c,
        cp: cd.cp,
        cpp: cd.cpp,
        g: cd.g,
        v0,
        branch: if w > 0.0 { Branch::Plus } else { Branch::Minus },
        t0,
    })
}

/// v(x₁) = −(A·x₁ + C)⁻¹ ± P(x₁)^(−1/2).
pub fn abel_solution(ls: &LienardSystem, cd: &CubicData, branch: Branch, x1: f64) -> f64 {
    -1.0 / (ls.damping() * x1 + cd.c) + branch.sign() / cd.eval(x1).sqrt()
}

/// x₂ coefficients from x₁ coefficients: ((n+1)·x₁[n+1] + d₁·x₁[n]) / b₂.
pub fn recover_x2<T: Scalar>(x1: &[T], d1: &T, b2: &T) -> Vec<T> {
    let dx1 = poly::derivative(x1);
    x1.iter()
        .enumerate()
        .map(|(n, c)| {
            let slope = dx1.get(n).cloned().unwrap_or_else(T::zero);
            (slope + d1.clone() * c.clone()) / b2.clone()
        })
        .collect()
}

/// x₃ coefficients: N − x₁ − x₂ termwise.
pub fn recover_x3<T: Scalar>(x1: &[T], x2: &[T], n: &T) -> Vec<T> {
    x1.iter()
        .zip(x2)
        .enumerate()
        .map(|(k, (a, b))| {
            let base = if k == 0 { n.clone() } else { T::zero() };
            base - a.clone() - b.clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSolution {
    pub branch: Branch,
    pub order: usize,
    /// Coefficients of τ⁰..τ^order; `x1[0] = 0`.
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
    pub constants: Constants,
    /// Series time corresponding to t₀.
    pub tau0: f64,
    pub t0: f64,
    /// Estimated τ-radius of convergence of the x₁ series.
    pub radius: f64,
    pub params: ModelParams,
    pub lienard: LienardSystem,
    pub cubic: CubicData,
    pub depressed: DepressedCubic,
    pub roots: CubicRoots,
    pub series: SeriesCoeffs,
}

impl SeriesSolution {
    /// ρ₁..ρ_order.
    pub fn rho(&self) -> &[f64] {
        &self.x1[1..]
    }

    pub fn sigma(&self) -> &[f64] {
        self.series.sigma(self.branch)
    }

    pub fn t_off(&self) -> f64 {
        self.constants.t_off
    }

    /// State at series time τ, no radius check.
    pub fn state_at_series_time(&self, tau: f64) -> State {
        State::new(
            poly::horner(&self.x1, tau),
            poly::horner(&self.x2, tau),
            poly::horner(&self.x3, tau),
        )
    }

    /// Time derivative of the series state at series time τ.
    pub fn derivative_at_series_time(&self, tau: f64) -> State {
        State::new(
            poly::horner(&poly::derivative(&self.x1), tau),
            poly::horner(&poly::derivative(&self.x2), tau),
            poly::horner(&poly::derivative(&self.x3), tau),
        )
    }

    /// (x₁, x₁', x₁'') at series time τ.
    pub fn x1_jet(&self, tau: f64) -> (f64, f64, f64) {
        let d1 = poly::derivative(&self.x1);
        let d2 = poly::derivative(&d1);
        (
            poly::horner(&self.x1, tau),
            poly::horner(&d1, tau),
            poly::horner(&d2, tau),
        )
    }

    pub fn inside_radius(&self, t: f64) -> bool {
        !((t - self.t_off()).abs() > self.radius)
    }
}

/// Horner evaluation of the three series at scenario time `t`.
pub fn evaluate(sol: &SeriesSolution, t: f64) -> State {
    if !sol.inside_radius(t) {
        log::warn!(
            "t = {t} is outside the estimated convergence radius {:.4e} around t_off = {}",
            sol.radius,
            sol.t_off()
        );
    }
    sol.state_at_series_time(t - sol.t_off())
}

/// Radius of convergence from coefficient growth.
///
/// Uses successive coefficient ratios over the trailing half of the nonzero
/// coefficients (at least six) and extrapolates them linearly in 1/n to
/// n → ∞ (Domb–Sykes), which removes the algebraic prefactor that makes the
/// plain root test converge slowly. Returns `+∞` when the extrapolated
/// growth rate collapses to zero (superexponential decay).
pub fn radius_estimate(rho: &[f64]) -> Result<f64> {
    let nonzero: Vec<(f64, f64)> = rho
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0 && c.is_finite())
        .map(|(i, c)| ((i + 1) as f64, c.abs()))
        .collect();
    if nonzero.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "radius estimate needs at least 6 nonzero coefficients, got {}",
            nonzero.len()
        )));
    }
    let window = (nonzero.len() / 2).max(6);
    let tail = &nonzero[nonzero.len() - window..];
    let pts: Vec<(f64, f64)> = tail
        .windows(2)
        .map(|w| {
            let ((n, a), (m, b)) = (w[0], w[1]);
            let growth = ((b.ln() - a.ln()) / (m - n)).exp();
            (2.0 / (n + m), growth)
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let last = pts.last().map(|p| p.1).unwrap_or(0.0);
    if !(intercept > 0.1 * last) {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / intercept)
}

/// Series time τ with x₁(τ) = target: first sign change scanning from τ = 0
/// toward `limit` in the direction x₁ grows toward the target, then bisection.
pub fn align_time(x1: &[f64], target: f64, limit: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    let rho1 = x1.get(1).copied().unwrap_or(0.0);
    if rho1 == 0.0 {
        return Err(Error::TimeAlignment("ρ₁ = 0".into()));
    }
    let dir = (target / rho1).signum();
    let f = |tau: f64| poly::horner(x1, tau) - target;
    const SCAN: usize = 400;
    let mut lo = 0.0;
    let mut flo = f(lo);
    for i in 1..=SCAN {
        let hi = dir * limit * i as f64 / SCAN as f64;
        let fhi = f(hi);
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() != fhi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, flo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 || (b - a).abs() <= f64::EPSILON * mid.abs() {
                    return Ok(mid);
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::TimeAlignment(format!(
        "x₁ = {target} is not reached within |τ| ≤ {limit:.4e}"
    )))
}

fn exact_revert(sigma: &[f64], order: usize) -> Result<Vec<f64>> {
    let exact: Vec<BigRational> = sigma
        .iter()
        .map(|s| {
            scalar::rational_from_f64(*s)
                .ok_or_else(|| Error::Domain(format!("σ = {s} has no exact rational value")))
        })
        .collect::<Result<_>>()?;
    Ok(reversion::revert(&exact, order)?
        .iter()
        .map(Scalar::to_f64)
        .collect())
}

/// Runs reduction → cubic → series → reversion → recovery.
pub fn solve_series(
    p: &ModelParams,
    s0: &State,
    t0: f64,
    opts: &SolveOptions,
) -> Result<SeriesSolution> {
    p.validate().map_err(|e| e.at(Stage::Model))?;
    s0.check_initial().map_err(|e| e.at(Stage::Model))?;
    if opts.order == 0 {
        return Err(Error::Domain("order must be at least 1".into()).at(Stage::Series));
    }

    let fit = fit_constants(p, s0, t0, opts.c, opts.branch).map_err(|e| e.at(Stage::Assembly))?;

    let lienard = reduction::lienard_coeffs(p);
    let cubic = reduction::cubic_from_abel(&lienard, opts.c, fit.cp, fit.cpp)
        .map_err(|e| e.at(Stage::Reduction))?;

    let (depressed, roots) = cubic::solve_cubic(
        &cubic,
        CubicOptions {
            trig_fallback: opts.trig_fallback,
        },
    )
    .map_err(|e| e.at(Stage::Cubic))?;

    let series = SeriesCoeffs::build(lienard.damping(), opts.c, cubic.d, roots.theta, opts.order)
        .map_err(|e| e.at(Stage::Series))?;

    let sigma = series.sigma(opts.branch);
    let rho = if opts.exact_reversion {
        exact_revert(sigma, opts.order)
    } else {
        reversion::revert_f64(sigma, opts.order)
    }
    .map_err(|e| e.at(Stage::Reversion))?;

    let x1: Vec<f64> = std::iter::once(0.0).chain(rho.iter().copied()).collect();
    let x2 = recover_x2(&x1, &p.d1, &p.b2);
    let x3 = recover_x3(&x1, &x2, &p.n);

    let radius = match radius_estimate(&rho) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{e}; treating the radius as unknown");
            f64::NAN
        }
    };
    let limit = if radius.is_finite() && radius > 0.0 {
        0.95 * radius
    } else {
        10.0 * (s0.x1 / rho[0]).abs() + 1.0
    };
    let tau0 = align_time(&x1, s0.x1, limit).map_err(|e| e.at(Stage::Assembly))?;

    Ok(SeriesSolution {
        branch: opts.branch,
        order: opts.order,
        x1,
        x2,
        x3,
        constants: Constants {
            c: opts.c,
            cp: fit.cp,
            cpp: fit.cpp,
            g: fit.g,
            t_off: t0 - tau0,
        },
        tau0,
        t0,
        radius,
        params: p.clone(),
        lienard,
        cubic,
        depressed,
        roots,
        series,
    })
}

/// One x₁ point of the Abel decomposition check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelPoint {
    pub x1: f64,
    pub v1: f64,
    pub v2: f64,
    /// dv₁/dx₁ − A·v₁²
    pub v1_residual: f64,
    /// dv₂/dx₁ − B·v₂³
    pub v2_residual: f64,
    /// dv/dx₁ − A·v² − B·v³ for v = v₁ + v₂
    pub composite: f64,
    /// A(2v₁v₂ + v₂²) + B(v₁³ + 3v₁²v₂ + 3v₁v₂²)
    pub cross_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelBranchReport {
    pub branch: Branch,
    pub points: Vec<AbelPoint>,
    pub v1_max: f64,
    pub v2_max: f64,
    pub composite_max: f64,
    pub composite_rms: f64,
    /// max |composite + cross_term|
    pub cross_term_mismatch: f64,
}

/// Cross term left over when v₁ + v₂ is substituted into the Abel equation:
/// the composite residual equals its negative.
pub fn abel_cross_term(damping: f64, restoring: f64, v1: f64, v2: f64) -> f64 {
    damping * (2.0 * v1 * v2 + v2 * v2)
        + restoring * (v1 * v1 * v1 + 3.0 * v1 * v1 * v2 + 3.0 * v1 * v2 * v2)
}

/// Evaluates the superposition v = v₁ + v₂ in closed form on `x1_grid` and
/// measures how well it, and each part alone, satisfies its equation.
pub fn abel_decomposition_residual(
    ls: &LienardSystem,
    cd: &CubicData,
    x1_grid: &[f64],
) -> Result<[AbelBranchReport; 2]> {
    let bad: Vec<f64> = x1_grid
        .iter()
        .copied()
        .filter(|&x| !(cd.eval(x) > 0.0))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Domain(format!("P(x₁) ≤ 0 at x₁ = {bad:?}")));
    }
    let a = ls.damping();
    if let Some(x) = x1_grid.iter().find(|&&x| a * x + cd.c == 0.0) {
        return Err(Error::Domain(format!("A·x₁ + C = 0 at x₁ = {x}")));
    }
    let report = |branch: Branch| {
        let sign = branch.sign();
        let points: Vec<AbelPoint> = x1_grid
            .iter()
            .map(|&x| {
                let lin = a * x + cd.c;
                let p = cd.eval(x);
                let b = ls.restoring_at(x);
                let v1 = -1.0 / lin;
                let dv1 = a / (lin * lin);
                let v2 = sign / p.sqrt();
                let dv2 = -0.5 * sign * cd.eval_derivative(x) / (p * p.sqrt());
                let v = v1 + v2;
                AbelPoint {
                    x1: x,
                    v1,
                    v2,
                    v1_residual: dv1 - a * v1 * v1,
                    v2_residual: dv2 - b * v2 * v2 * v2,
                    composite: (dv1 + dv2) - a * v * v - b * v * v * v,
                    cross_term: abel_cross_term(a, b, v1, v2),
                }
            })
            .collect();
        let max_of = |f: &dyn Fn(&AbelPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
        let composite_rms = (points
            .iter()
            .map(|p| p.composite * p.composite)
            .sum::<f64>()
            / points.len().max(1) as f64)
            .sqrt();
        AbelBranchReport {
            branch,
            v1_max: max_of(&|p| p.v1_residual.abs()),
            v2_max: max_of(&|p| p.v2_residual.abs()),
            composite_max: max_of(&|p| p.composite.abs()),
            cross_term_mismatch: max_of(&|p| (p.composite + p.cross_term).abs()),
            composite_rms,
            points,
        }
    };
    Ok([report(Branch::Plus), report(Branch::Minus)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyClass {
    /// Identities the artifact guarantees; failure means a bug or a broken
    /// numerical regime.
    Hard,
    /// Measurements of claims that need not hold.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualFamily {
    pub name: String,
    pub class: FamilyClass,
    /// `(abscissa, residual)`; the abscissa is t, x₁ or a power index.
    pub samples: Vec<(f64, f64)>,
    pub max: f64,
    pub rms: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualFamily {
    pub fn new(name: &str, class: FamilyClass, samples: Vec<(f64, f64)>, tolerance: f64) -> Self {
        let (max, rms) = summarize(&samples);
        ResidualFamily {
            name: name.to_string(),
            class,
            pass: max <= tolerance,
            samples,
            max,
            rms,
            tolerance,
        }
    }

    /// Recomputes the verdict against a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.max <= tolerance;
        self
    }
}

/// Max |r| and RMS; NaN residuals propagate into the max.
pub fn summarize(samples: &[(f64, f64)]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for &(_, r) in samples {
        if r.is_nan() {
            max = f64::NAN;
        } else if !max.is_nan() {
            max = max.max(r.abs());
        }
        sq += r * r;
    }
    (max, (sq / samples.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub tol_hard: f64,
    pub tol_diag: f64,
    /// Upper bound on the RK4 step.
    pub step: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            tol_hard: 1e-9,
            tol_diag: 1e-6,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub families: Vec<ResidualFamily>,
    pub branch: Branch,
    pub radius: f64,
    pub t_off: f64,
    /// Validation samples with |t − t_off| beyond the estimated radius.
    pub outside_radius: usize,
    /// Max series-vs-RK4 deviation over samples with |t − t_off| ≤ radius/10.
    pub deviation_within_tenth_radius: Option<f64>,
    pub hard_pass: bool,
    pub diagnostic_pass: bool,
}

impl ResidualReport {
    pub fn family(&self, name: &str) -> Option<&ResidualFamily> {
        self.families.iter().find(|f| f.name == name)
    }
}

pub const FAMILY_SYSTEM: &str = "system_residual";
pub const FAMILY_LIENARD: &str = "lienard_residual";
pub const FAMILY_ABEL: &str = "abel_decomposition";
pub const FAMILY_DRIFT: &str = "conservation_drift";
pub const FAMILY_DEVIATION: &str = "series_vs_reference";
pub const FAMILY_COMPOSITION: &str = "reversion_composition";
pub const FAMILY_CLOSED: &str = "closed_consistency";
pub const FAMILY_LIENARD_DRIFT: &str = "lienard_drift_identity";

/// Relative coefficient residuals of σ∘ρ − id, each scaled by the same
/// composition taken over absolute values.
pub fn relative_composition_residual(sigma: &[f64], rho: &[f64], order: usize) -> Vec<f64> {
    let res = reversion::compose_check(sigma, rho, order);
    let abs = |c: &[f64]| c.iter().map(|v| v.abs()).collect::<Vec<_>>();
    let scale = reversion::compose_check(&abs(sigma), &abs(rho), order);
    res.iter()
        .zip(scale)
        .enumerate()
        .map(|(k, (r, s))| {
            // compose_check subtracted 1 from the linear term of the abs composition too
            let s = if k == 0 { s + 1.0 } else { s };
            r / s.max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// Builds all residual families for `sol` over `[t₀, t₀ + horizon]`.
pub fn validate(
    sol: &SeriesSolution,
    p: &ModelParams,
    s0: &State,
    horizon: f64,
    opts: &ValidateOptions,
) -> Result<ResidualReport> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let intervals = GRID_POINTS - 1;
    let sub = ((horizon / (intervals as f64 * opts.step)) - 1e-9)
        .ceil()
        .max(1.0) as usize;
    let h = horizon / (intervals * sub) as f64;
    let t0 = sol.t0;
    let t_end = t0 + horizon;
    let reference = model::integrate_reference(p, *s0, t0, t_end, h)?;
    let closed = reduction::integrate_closed(p, s0.x1, s0.x2, t0, t_end, h)?;
    let grid: Vec<usize> = (0..GRID_POINTS).map(|i| i * sub).collect();

    let mut families = Vec::new();

    let system: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let t = reference.samples[i].0;
            let tau = t - sol.t_off();
            let s = sol.state_at_series_time(tau);
            let ds = sol.derivative_at_series_time(tau);
            let f = model::rhs_unchecked(p, &s);
            (t, ds.max_abs_diff(&f))
        })
        .collect();
    families.push(ResidualFamily::new(
        FAMILY_SYSTEM,
        FamilyClass::Diagnostic,
        system,
        opts.tol_diag,
    ));

    let lienard: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let t = reference.samples[i].0;
            let (x, dx, ddx) = sol.x1_jet(t - sol.t_off());
            (t, sol.lienard.residual(x, dx, ddx))
        })
        .collect();
    families.push(ResidualFamily::new(
        FAMILY_LIENARD,
        FamilyClass::Diagnostic,
        lienard,
        opts.tol_diag,
    ));

    let x1_grid: Vec<f64> = grid
        .iter()
        .map(|&i| {
            sol.state_at_series_time(reference.samples[i].0 - sol.t_off())
                .x1
        })
        .collect();
    let abel: Vec<(f64, f64)> =
        match abel_decomposition_residual(&sol.lienard, &sol.cubic, &x1_grid) {
            Ok(reports) => {
                let r = &reports[match sol.branch {
                    Branch::Plus => 0,
                    Branch::Minus => 1,
                }];
                r.points.iter().map(|pt| (pt.x1, pt.composite)).collect()
            }
            Err(e) => {
                log::warn!("abel decomposition: {e}");
                x1_grid.iter().map(|&x| (x, f64::NAN)).collect()
            }
        };
    families.push(ResidualFamily::new(
        FAMILY_ABEL,
        FamilyClass::Diagnostic,
        abel,
        opts.tol_diag,
    ));

    let drift: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let (t, s) = reference.samples[i];
            (t, s.total() - p.n)
        })
        .collect();
    families.push(ResidualFamily::new(
        FAMILY_DRIFT,
        FamilyClass::Diagnostic,
        drift,
        opts.tol_diag,
    ));

    let deviation: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let (t, s) = reference.samples[i];
            (
                t,
                sol.state_at_series_time(t - sol.t_off()).max_abs_diff(&s),
            )
        })
        .collect();
    let within: Vec<f64> = deviation
        .iter()
        .filter(|(t, _)| (t - sol.t_off()).abs() <= 0.1 * sol.radius)
        .map(|(_, d)| *d)
        .collect();
    let deviation_within_tenth_radius = if within.is_empty() {
        None
    } else {
        Some(within.iter().copied().fold(0.0, f64::max))
    };
    let outside_radius = deviation
        .iter()
        .filter(|(t, _)| !sol.inside_radius(*t))
        .count();
    families.push(ResidualFamily::new(
        FAMILY_DEVIATION,
        FamilyClass::Diagnostic,
        deviation,
        opts.tol_diag,
    ));

    let composition: Vec<(f64, f64)> =
        relative_composition_residual(sol.sigma(), sol.rho(), sol.order)
            .into_iter()
            .enumerate()
            .map(|(k, r)| ((k + 1) as f64, r))
            .collect();
    families.push(ResidualFamily::new(
        FAMILY_COMPOSITION,
        FamilyClass::Hard,
        composition,
        opts.tol_hard,
    ));

    let consistency: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let (t, s) = closed.samples[i];
            let (dx1, _) = reduction::closed_system_derivatives(p, s.x1, s.x2);
            let x2 = (dx1 + p.d1 * s.x1) / p.b2;
            (t, (x2 - s.x2) / (1.0 + s.x2.abs()))
        })
        .collect();
    families.push(ResidualFamily::new(
        FAMILY_CLOSED,
        FamilyClass::Hard,
        consistency,
        opts.tol_hard,
    ));

    let k2_over_a = p.k2 / sol.lienard.a;
    let identity: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| {
            let (t, s) = closed.samples[i];
            let (dx1, ddx1) = reduction::closed_system_derivatives(p, s.x1, s.x2);
            let r = sol.lienard.residual(s.x1, dx1, ddx1);
            let full = State::new(s.x1, s.x2, p.n - s.x1 - s.x2);
            let expected = k2_over_a * model::drift_rate(p, &full);
            let scale = 1.0 + reduction::lienard_term_scale(&sol.lienard, s.x1, dx1, ddx1);
            (t, (r - expected) / scale)
        })
        .collect();
    families.push(ResidualFamily::new(
        FAMILY_LIENARD_DRIFT,
        FamilyClass::Hard,
        identity,
        opts.tol_hard,
    ));

    let hard_pass = families
        .iter()
        .filter(|f| f.class == FamilyClass::Hard)
        .all(|f| f.pass);
    let diagnostic_pass = families
        .iter()
        .filter(|f| f.class == FamilyClass::Diagnostic)
        .all(|f| f.pass);
    Ok(ResidualReport {
        families,
        branch: sol.branch,
        radius: sol.radius,
        t_off: sol.t_off(),
        outside_radius,
        deviation_within_tenth_radius,
        hard_pass,
        diagnostic_pass,
    })
}
