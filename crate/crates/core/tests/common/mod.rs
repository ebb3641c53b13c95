#![allow(dead_code)]

use adatriplet::vector::{normalize, RawVector, UnitVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn raw(v: &[f64]) -> RawVector {
    RawVector::new(v.to_vec()).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> UnitVector {
    normalize(&raw(&gaussian(rng, dim))).unwrap()
}

/// Central difference of a scalar function at `x` along coordinate `i`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}
