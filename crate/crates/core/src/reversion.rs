//! Series reversion: given t = Σ σₙ xⁿ with σ₁ ≠ 0, find x = Σ ρₙ tⁿ.
//!
//! The main route sums over integer partitions of n−1 in multiplicity form
//! (s₁, s₂, …) with Σ i·sᵢ = n−1:
//!
//! ```text
//! ρₙ = 1/(n·σ₁ⁿ) · Σ (−1)^Σsᵢ · n(n+1)⋯(n−1+Σsᵢ)/(s₁!s₂!⋯) · Π (σᵢ₊₁/σ₁)^sᵢ
//! ```
//!
//! [`revert_oracle`] solves the same problem by matching coefficients of the
//! composed series one order at a time and never touches partitions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::{self, Scalar};
use crate::series::Branch;

/// Default maximum reversion order.
pub const DEFAULT_MAX_ORDER: usize = 24;

/// An integer partition in multiplicity form: `mult[i]` counts part `i+1`.
/// Trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    mult: Vec<u32>,
}

impl Partition {
    pub fn from_multiplicities(mut mult: Vec<u32>) -> Self {
        while mult.last() == Some(&0) {
            mult.pop();
        }
        Partition { mult }
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// sᵢ, the count of part `i` (1-based).
    pub fn count(&self, part: usize) -> u32 {
        part.checked_sub(1)
            .and_then(|i| self.mult.get(i))
            .copied()
            .unwrap_or(0)
    }

    /// Σ i·sᵢ.
    pub fn weight(&self) -> usize {
        self.mult
            .iter()
            .enumerate()
            .map(|(i, &s)| (i + 1) * s as usize)
            .sum()
    }

    /// Σ sᵢ.
    pub fn num_parts(&self) -> usize {
        self.mult.iter().map(|&s| s as usize).sum()
    }
}

/// All partitions of `m`, each exactly once, in decreasing lexicographic
/// order of (s₁, s₂, …).
pub fn partitions(m: usize) -> Vec<Partition> {
    fn rec(part: usize, remaining: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::from_multiplicities(cur.clone()));
            return;
        }
        if part > remaining {
            return;
        }
        for s in (0..=remaining / part).rev() {
            cur.push(s as u32);
            rec(part + 1, remaining - s * part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, m, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// n(n+1)⋯(n−1+k) / (s₁!s₂!⋯), exact.
fn partition_weight(n: usize, p: &Partition) -> BigInt {
    let k = p.num_parts();
    let mut rising = BigInt::one();
    for j in 0..k {
        rising *= n + j;
    }
    let denom = p
        .multiplicities()
        .iter()
        .fold(BigInt::one(), |acc, &s| acc * factorial(s));
    rising / denom
}

fn check_input<T: Scalar>(sigma: &[T], order: usize) -> Result<()> {
    if sigma.len() < order {
        return Err(Error::InsufficientData(format!(
            "reversion to order {order} needs {order} σ terms, got {}",
            sigma.len()
        )));
    }
    if order > 0 && sigma[0].is_zero() {
        return Err(Error::NonInvertibleSeries);
    }
    Ok(())
}

/// ρ₁..ρ_order (index 0 holds ρ₁) from σ₁..σ_order by the partition formula.
pub fn revert<T: Scalar>(sigma: &[T], order: usize) -> Result<Vec<T>> {
    check_input(sigma, order)?;
    let s1 = sigma[0].clone();
    let ratios: Vec<T> = sigma
        .iter()
        .skip(1)
        .map(|s| s.clone() / s1.clone())
        .collect();
    let mut rho = Vec::with_capacity(order);
    for n in 1..=order {
        let terms: Vec<T> = partitions(n - 1)
            .iter()
            .map(|p| {
                let mut term = T::from_bigint(&partition_weight(n, p));
                if p.num_parts() % 2 == 1 {
                    term = -term;
                }
                for (i, &s) in p.multiplicities().iter().enumerate() {
                    if s > 0 {
                        term = term * ratios[i].powi(s);
                    }
                }
                term
            })
            .collect();
        let sum = poly::pairwise_sum(&terms);
        rho.push(sum / (T::from_i64(n as i64) * s1.powi(n as u32)));
    }
    Ok(rho)
}

/// Float reversion by the partition formula with the sum carried out exactly.
///
/// The partition terms alternate in sign and can outgrow ρₙ by many orders
/// of magnitude, so accumulating them in floats loses every digit by order
/// ~15 on realistic σ. Every finite `f64` is a dyadic rational: scaled to
/// integers mₖ = 2^s·σₖ, all terms of ρₙ share the denominator m₁^(n−1), the
/// numerator is a single integer, and ρₙ is rounded once.
pub fn revert_f64(sigma: &[f64], order: usize) -> Result<Vec<f64>> {
    check_input(sigma, order)?;
    let exact: Vec<BigRational> = sigma[..order]
        .iter()
        .map(|s| {
            scalar::rational_from_f64(*s)
                .ok_or_else(|| Error::Domain(format!("σ coefficient {s} is not finite")))
        })
        .collect::<Result<_>>()?;
    // denominators are powers of two, so the largest is a common multiple
    let scale = exact
        .iter()
        .map(|r| r.denom().clone())
        .max()
        .unwrap_or_else(BigInt::one);
    let m: Vec<BigInt> = exact
        .iter()
        .map(|r| r.numer() * (&scale / r.denom()))
        .collect();
    // powers[i][s] = m_i^s
    let powers: Vec<Vec<BigInt>> = m
        .iter()
        .map(|mi| {
            let mut row = vec![BigInt::one()];
            for s in 1..=2 * order {
                let next = &row[s - 1] * mi;
                row.push(next);
            }
            row
        })
        .collect();
    let mut rho = Vec::with_capacity(order);
    for n in 1..=order {
        let mut numer = BigInt::zero();
        for p in partitions(n - 1) {
            let j = p.num_parts();
            let mut term = partition_weight(n, &p) * &powers[0][n - 1 - j];
            for (i, &s) in p.multiplicities().iter().enumerate() {
                if s > 0 {
                    term *= &powers[i + 1][s as usize];
                }
            }
            if j % 2 == 1 {
                numer -= term;
            } else {
                numer += term;
            }
        }
        // ρₙ = numer·scaleⁿ / (n·m₁^(2n−1))
        let value = BigRational::new(
            numer * num_traits::pow(scale.clone(), n),
            BigInt::from(n) * &powers[0][2 * n - 1],
        );
        rho.push(value.to_f64());
    }
    Ok(rho)
}

/// Independent reversion by coefficient matching: at each order the only
/// unknown contribution is σ₁·ρₙ.
pub fn revert_oracle<T: Scalar>(sigma: &[T], order: usize) -> Result<Vec<T>> {
    check_input(sigma, order)?;
    let len = order + 1;
    let outer: Vec<T> = std::iter::once(T::zero())
        .chain(sigma.iter().take(order).cloned())
        .collect();
    let mut inner = vec![T::zero(); len];
    for n in 1..=order {
        let composed = poly::compose_trunc(&outer, &inner, len);
        let target = if n == 1 { T::one() } else { T::zero() };
        inner[n] = (target - composed[n].clone()) / sigma[0].clone();
    }
    Ok(inner.into_iter().skip(1).collect())
}

/// Coefficients of (σ∘ρ)(t) − t for t¹..t^order.
pub fn compose_check<T: Scalar>(sigma: &[T], rho: &[T], order: usize) -> Vec<T> {
    let len = order + 1;
    let lift = |c: &[T]| -> Vec<T> {
        std::iter::once(T::zero())
            .chain(c.iter().take(order).cloned())
            .collect()
    };
    let mut out = poly::compose_trunc(&lift(sigma), &lift(rho), len);
    if len > 1 {
        out[1] = out[1].clone() - T::one();
    }
    out.into_iter().skip(1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversionResult {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub branch: Branch,
}

pub fn revert_branch(sigma: &[f64], order: usize, branch: Branch) -> Result<ReversionResult> {
    Ok(ReversionResult {
        rho: revert_f64(sigma, order)?,
        sigma: sigma[..order].to_vec(),
        branch,
    })
}
