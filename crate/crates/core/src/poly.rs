//! Truncated power-series helpers. A series is a coefficient vector indexed
//! by power, `c[k]` multiplying `tᵏ`.

use crate::scalar::Scalar;

/// Product truncated to powers `0..len`.
pub fn mul_trunc<T: Scalar>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

/// Cauchy convolution over the common length of the inputs.
pub fn convolve<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    mul_trunc(a, b, a.len().min(b.len()))
}

/// Term-by-term derivative: `k·c[k]` moved to index `k−1`.
pub fn derivative<T: Scalar>(c: &[T]) -> Vec<T> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, ck)| T::from_i64(k as i64) * ck.clone())
        .collect()
}

pub fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

/// `outer ∘ inner` truncated to `len` terms; `inner` must have zero constant term.
pub fn compose_trunc<T: Scalar>(outer: &[T], inner: &[T], len: usize) -> Vec<T> {
    debug_assert!(inner.first().is_none_or(|c| c.is_zero()));
    let mut out = vec![T::zero(); len];
    let mut power = vec![T::zero(); len];
    if len > 0 {
        power[0] = T::one();
    }
    for (k, ok) in outer.iter().enumerate() {
        if k >= len {
            break;
        }
        if k > 0 {
            power = mul_trunc(&power, inner, len);
        }
        if ok.is_zero() {
            continue;
        }
        for (o, p) in out.iter_mut().zip(&power) {
            *o = o.clone() + ok.clone() * p.clone();
        }
    }
    out
}

/// Pairwise (tree) summation.
pub fn pairwise_sum<T: Scalar>(terms: &[T]) -> T {
    match terms.len() {
        0 => T::zero(),
        1 => terms[0].clone(),
        n => {
            let (lo, hi) = terms.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
