//! Seeded random LPs that are guaranteed feasible and bounded.
//!
//! `b = A x⁰ − s` for a nonnegative `x⁰` and surplus `s ≥ 0` makes the
//! primal feasible; `c = Aᵀ y⁰ + r` with `y⁰, r ≥ 0` makes the dual feasible,
//! so an optimum exists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::StandardLp;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomLpConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    pub density: f64,
}

impl Default for RandomLpConfig {
    fn default() -> Self {
        RandomLpConfig {
            min_dim: 10,
            max_dim: 100,
            density: 0.15,
        }
    }
}

pub fn random_lp(seed: u64, cfg: &RandomLpConfig) -> StandardLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(cfg.min_dim..=cfg.max_dim);
    let n = rng.gen_range(cfg.min_dim..=cfg.max_dim);
    let mut triplets = Vec::new();
    for i in 0..m {
        let mut any = false;
        for j in 0..n {
            if rng.gen_bool(cfg.density) {
                triplets.push((i, j, round2(rng.gen_range(-1.0..1.0))));
                any = true;
            }
        }
        if !any {
            triplets.push((i, rng.gen_range(0..n), round2(rng.gen_range(0.1..1.0))));
        }
    }
    let a = CsrMatrix::from_triplets(m, n, &triplets).expect("in range");

    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { round2(rng.gen_range(0.0..5.0)) } else { 0.0 })
        .collect();
    let ax0 = a.spmv(&x0).expect("sized");
    let b = ax0
        .iter()
        .map(|v| {
            let s = if rng.gen_bool(0.5) { round2(rng.gen_range(0.0..2.0)) } else { 0.0 };
            v - s
        })
        .collect();
    let y0: Vec<f64> = (0..m)
        .map(|_| if rng.gen_bool(0.5) { round2(rng.gen_range(0.0..2.0)) } else { 0.0 })
        .collect();
    let aty0 = a.spmv_transpose(&y0).expect("sized");
    let c = aty0
        .iter()
        .map(|v| {
            let r = if rng.gen_bool(0.5) { round2(rng.gen_range(0.0..1.0)) } else { 0.0 };
            v + r
        })
        .collect();
    StandardLp::new(c, a, b).expect("consistent dimensions")
}

/// `count` instances with seeds `base_seed, base_seed + 1, …`.
pub fn random_suite(count: usize, base_seed: u64, cfg: &RandomLpConfig) -> Vec<StandardLp> {
    (0..count as u64).map(|k| random_lp(base_seed + k, cfg)).collect()
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
