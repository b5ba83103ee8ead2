#![allow(dead_code)]

use abelprop::{ModelParams, State};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_params<R: Rng>(rng: &mut R) -> ModelParams {
    let mut u = || rng.gen_range(0.1..2.0);
    ModelParams::new(u(), u(), u(), u(), u(), u(), u(), u()).unwrap()
}

/// A nonzero rational num/den with |num| ≤ max_num and 1 ≤ den ≤ max_den.
pub fn rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> BigRational {
    loop {
        let n = rng.gen_range(-max_num..=max_num);
        if n != 0 {
            let d = rng.gen_range(1..=max_den);
            return BigRational::new(BigInt::from(n), BigInt::from(d));
        }
    }
}

pub fn positive_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> BigRational {
    let n = rng.gen_range(1..=max_num);
    let d = rng.gen_range(1..=max_den);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_rational_params<R: Rng>(rng: &mut R) -> ModelParams<BigRational> {
    let mut u = || positive_rational(rng, 20, 7);
    ModelParams::new(u(), u(), u(), u(), u(), u(), u(), u()).unwrap()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parameters whose fitted cubic has a double root: all rates 1 except
/// b₁ = 8, N = 1, with x₂⁰ chosen so that G lands on the local minimum of P.
pub fn double_root_scenario() -> (ModelParams, State) {
    let p = ModelParams::new(1.0, 1.0, 1.0, 8.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    (p, State::new(0.01, 0.6024855454665909, 0.38751445453340905))
}
