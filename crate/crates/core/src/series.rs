//! Coefficient families of the inverse relation t(x₁) = Σ σₙ x₁ⁿ.
//!
//! * μₙ expands 1/√((x+θ₁)(x+θ₂)(x+θ₃)) through three binomial series of
//!   (x+θ)^(−1/2).
//! * λₙ expands −(1/A)·log(1 + A·x/C); the constant −(1/A)·log C is dropped.
//! * σₙ± = λₙ₋₁ ± μₙ₋₁/(n√D).
//!
//! μ is split as μₙ = μ̂ₙ / √(θ₁θ₂θ₃) where μ̂ₙ uses only integer powers of
//! θ, so the rational path can compute μ̂ exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::Scalar;

/// Default truncation order of the series pipeline.
pub const DEFAULT_ORDER: usize = 24;

/// Sign branch of v = −(Ax₁+C)⁻¹ ± P(x₁)^(−1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Branch> {
        match s {
            "+" => Some(Branch::Plus),
            "-" => Some(Branch::Minus),
            _ => None,
        }
    }
}

/// Generalized binomial coefficient `x choose m` by the product form.
pub fn gen_binomial<T: Scalar>(x: T, m: usize) -> T {
    let mut acc = T::one();
    for i in 0..m {
        acc = acc * (x.clone() - T::from_i64(i as i64)) / T::from_i64(i as i64 + 1);
    }
    acc
}

/// Coefficients of (1 + x/θ)^(−1/2): binom(−1/2, p)/θᵖ for p = 0..=n_max.
pub fn inv_sqrt_binomial_series<T: Scalar>(theta: &T, n_max: usize) -> Vec<T> {
    // binom(−1/2, p) = binom(−1/2, p−1)·(−1/2 − (p−1))/p, so the ratio between
    // neighbours is −(2p−1)/(2pθ).
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = T::one();
    out.push(c.clone());
    for p in 1..=n_max as i64 {
        c = c * T::from_i64(-(2 * p - 1)) / (T::from_i64(2 * p) * theta.clone());
        out.push(c.clone());
    }
    out
}

fn check_thetas<T: Scalar>(theta: &[T; 3]) -> Result<()> {
    for (k, t) in theta.iter().enumerate() {
        if !(t.is_finite() && *t > T::zero()) {
            return Err(Error::Domain(format!(
                "θ{} = {} must be positive for real fractional powers",
                k + 1,
                t.to_f64()
            )));
        }
    }
    Ok(())
}

/// μ̂₀..μ̂_{n_max}: the triple sum with the common factor 1/√(θ₁θ₂θ₃) removed.
pub fn mu_scaled<T: Scalar>(theta: &[T; 3], n_max: usize) -> Result<Vec<T>> {
    check_thetas(theta)?;
    let [s1, s2, s3] = [0, 1, 2].map(|k| inv_sqrt_binomial_series(&theta[k], n_max));
    Ok(poly::convolve(&poly::convolve(&s1, &s2), &s3))
}

/// μ₀..μ_{n_max}.
pub fn mu_coeffs(theta: [f64; 3], n_max: usize) -> Result<Vec<f64>> {
    let scale = 1.0 / (theta[0] * theta[1] * theta[2]).sqrt();
    Ok(mu_scaled(&theta, n_max)?
        .into_iter()
        .map(|m| m * scale)
        .collect())
}

/// μₙ as the literal triple sum over p+q+r = n. Quadratic in the number of
/// terms per coefficient; used to cross-check the convolution route.
pub fn mu_triple_sum(theta: [f64; 3], n: usize) -> f64 {
    let b = |p: usize, th: f64| gen_binomial(-0.5, p) / th.powf(p as f64 + 0.5);
    let mut acc = 0.0;
    for p in 0..=n {
        for q in 0..=n - p {
            let r = n - p - q;
            acc += b(p, theta[0]) * b(q, theta[1]) * b(r, theta[2]);
        }
    }
    acc
}

/// λₙ = (−1)ⁿ⁺¹Aⁿ / ((n+1)Cⁿ⁺¹), exact over any field.
pub fn lambda_coeffs<T: Scalar>(a: &T, c: &T, n_max: usize) -> Result<Vec<T>> {
    if c.is_zero() {
        return Err(Error::Domain("λ-series needs C ≠ 0".into()));
    }
    let ratio = -(a.clone() / c.clone());
    let mut out = Vec::with_capacity(n_max + 1);
    // (−A/C)ⁿ · (−1/C) / (n+1)
    let mut pow = -(T::one() / c.clone());
    for n in 0..=n_max {
        out.push(pow.clone() / T::from_i64(n as i64 + 1));
        pow = pow * ratio.clone();
    }
    Ok(out)
}

/// Float λₙ. When |A/C| > 1 the magnitude is tracked in log space so large
/// orders do not overflow before the division by (n+1).
pub fn lambda_coeffs_f64(a: f64, c: f64, n_max: usize) -> Result<Vec<f64>> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Domain("λ-series needs a finite C ≠ 0".into()));
    }
    let r = a / c;
    if r.abs() <= 1.0 {
        return lambda_coeffs(&a, &c, n_max);
    }
    log::warn!(
        "|A/C| = {:.3} > 1: the logarithmic series converges only for |x₁| < {:.3e}",
        r.abs(),
        (c / a).abs()
    );
    let log_r = r.abs().ln();
    let log_c = c.abs().ln();
    Ok((0..=n_max)
        .map(|n| {
            // sign of (−1)ⁿ⁺¹·rⁿ/C
            let mut sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            if r < 0.0 && n % 2 == 1 {
                sign = -sign;
            }
            if c < 0.0 {
                sign = -sign;
            }
            sign * (n as f64 * log_r - log_c - ((n + 1) as f64).ln()).exp()
        })
        .collect())
}

/// σₙ± = λₙ₋₁ ± w·μₙ₋₁/n for n = 1..=n_max, with w the weight of the μ part
/// (1/√D for unscaled μ).
pub fn sigma_coeffs<T: Scalar>(
    lambda: &[T],
    mu: &[T],
    weight: &T,
    n_max: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    if lambda.len() < n_max || mu.len() < n_max {
        return Err(Error::InsufficientData(format!(
            "σ assembly to order {n_max} needs {n_max} λ and μ terms, got {} and {}",
            lambda.len(),
            mu.len()
        )));
    }
    let mut plus = Vec::with_capacity(n_max);
    let mut minus = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let m = weight.clone() * mu[n - 1].clone() / T::from_i64(n as i64);
        plus.push(lambda[n - 1].clone() + m.clone());
        minus.push(lambda[n - 1].clone() - m);
    }
    Ok((plus, minus))
}

/// Everything the reversion step needs, for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCoeffs {
    pub order: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma_plus: Vec<f64>,
    pub sigma_minus: Vec<f64>,
    pub damping: f64,
    pub c: f64,
    pub d: f64,
    pub theta: [f64; 3],
}

impl SeriesCoeffs {
    pub fn build(damping: f64, c: f64, d: f64, theta: [f64; 3], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("series order must be positive".into()));
        }
        if !(d > 0.0) {
            return Err(Error::Domain(format!("D = {d} must be positive")));
        }
        let lambda = lambda_coeffs_f64(damping, c, order - 1)?;
        let mu = mu_coeffs(theta, order - 1)?;
        let (sigma_plus, sigma_minus) = sigma_coeffs(&lambda, &mu, &(1.0 / d.sqrt()), order)?;
        let all = lambda
            .iter()
            .chain(&mu)
            .chain(&sigma_plus)
            .chain(&sigma_minus);
        if let Some(bad) = all.clone().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite series coefficient {bad}"
            )));
        }
        Ok(SeriesCoeffs {
            order,
            lambda,
            mu,
            sigma_plus,
            sigma_minus,
            damping,
            c,
            d,
            theta,
        })
    }

    pub fn sigma(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::Plus => &self.sigma_plus,
            Branch::Minus => &self.sigma_minus,
        }
    }

    /// Joint x₁-radius of the λ and μ expansions: min(|C/A|, θₖ).
    pub fn x_radius(&self) -> f64 {
        let log_radius = if self.damping == 0.0 {
            f64::INFINITY
        } else {
            (self.c / self.damping).abs()
        };
        self.theta.iter().fold(log_radius, |r, t| r.min(t.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(gen_binomial(-0.5, 0), 1.0);
        assert_eq!(gen_binomial(-0.5, 1), -0.5);
        assert_eq!(gen_binomial(q(-1, 2), 2), q(3, 8));
        assert_eq!(gen_binomial(3.0, 2), 3.0);
        assert_eq!(gen_binomial(3.0, 4), 0.0);
    }

    #[test]
    fn mu_for_unit_thetas() {
        let mu = mu_scaled(&[q(1, 1), q(1, 1), q(1, 1)], 2).unwrap();
        assert_eq!(mu, vec![q(1, 1), q(-3, 2), q(15, 8)]);
    }

    #[test]
    fn mu_leading_term() {
        let theta = [0.5, 2.0, 7.0];
        let mu = mu_coeffs(theta, 3).unwrap();
        assert!((mu[0] - 1.0 / 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mu_convolution_matches_triple_sum() {
        let theta = [0.7, 1.9, 3.2];
        let mu = mu_coeffs(theta, 8).unwrap();
        for (n, m) in mu.iter().enumerate() {
            let direct = mu_triple_sum(theta, n);
            assert!(
                (m - direct).abs() <= 1e-13 * direct.abs().max(1e-300),
                "n = {n}"
            );
        }
    }

    #[test]
    fn mu_pointwise() {
        let theta = [1.0, 4.0, 9.0];
        let mu = mu_coeffs(theta, 40).unwrap();
        let x: f64 = 0.1;
        let series = poly::horner(&mu, x);
        let direct = 1.0 / ((x + 1.0) * (x + 4.0) * (x + 9.0)).sqrt();
        assert!((series - direct).abs() < 1e-10);
    }

    #[test]
    fn mu_rejects_non_positive_theta() {
        assert!(mu_coeffs([1.0, 0.0, 2.0], 3).is_err());
        assert!(mu_coeffs([1.0, -1.0, 2.0], 3).is_err());
    }

    #[test]
    fn lambda_examples() {
        let l = lambda_coeffs(&q(1, 1), &q(1, 1), 2).unwrap();
        assert_eq!(l, vec![q(-1, 1), q(1, 2), q(-1, 3)]);
        let l = lambda_coeffs_f64(3.0, -4.0, 0).unwrap();
        assert_eq!(l[0], 0.25);
        assert!(lambda_coeffs_f64(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn lambda_log_space_agrees_with_direct() {
        for (a, c) in [(3.0, 2.0), (-3.0, 2.0), (3.0, -2.0), (-5.0, -0.5)] {
            let fast = lambda_coeffs_f64(a, c, 12).unwrap();
            let direct = lambda_coeffs(&a, &c, 12).unwrap();
            for (x, y) in fast.iter().zip(&direct) {
                assert!((x - y).abs() <= 1e-12 * y.abs(), "{a} {c}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn lambda_partial_sums_match_log() {
        let (a, c) = (2.0, 1.0);
        let l = lambda_coeffs_f64(a, c, 30).unwrap();
        let x: f64 = 0.1;
        let sum: f64 = l
            .iter()
            .enumerate()
            .map(|(n, ln)| ln * x.powi(n as i32 + 1))
            .sum();
        assert!((sum + 0.5 * 1.2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn sigma_branches() {
        let lambda = [1.0, 2.0, 3.0];
        let zeros = [0.0; 3];
        let (p, m) = sigma_coeffs(&lambda, &zeros, &2.0, 3).unwrap();
        assert_eq!(p, lambda.to_vec());
        assert_eq!(m, lambda.to_vec());
        let mu = [1.0, 1.0, 1.0];
        let (p, m) = sigma_coeffs(&zeros, &mu, &2.0, 3).unwrap();
        assert_eq!(p, vec![2.0, 1.0, 2.0 / 3.0]);
        assert!(p.iter().zip(&m).all(|(a, b)| *a == -*b));
        assert!(sigma_coeffs(&zeros, &mu, &1.0, 4).is_err());
    }
}
