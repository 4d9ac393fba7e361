//! Monte Carlo estimate of the return probability.
//!
//! Paths are split over [`SHARDS`] shards. Shard `s` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `s`, so the result depends only
//! on `(v, k, t, samples, seed)` and not on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{check_exhaustive, derive_params, enumerate_columns, pair_count, DesignParams};
use crate::error::{param, Result};

pub const SHARDS: u64 = 64;
/// Normal quantile for the 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Wilson score interval for `hits` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval always contains p; clamp away rounding at the ends
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

fn shard_hits(
    supports: &[Vec<usize>],
    d: usize,
    lambda: u64,
    t: u64,
    paths: u64,
    seed: u64,
    shard: u64,
) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let n = supports.len();
    let mut sums = vec![0u64; d];
    let mut hits = 0;
    for _ in 0..paths {
        sums.iter_mut().for_each(|s| *s = 0);
        for _ in 0..t {
            for &r in &supports[rng.random_range(0..n)] {
                sums[r] += 1;
            }
        }
        if sums.iter().all(|&s| s == lambda) {
            hits += 1;
        }
    }
    hits
}

/// Fraction of `samples` random `t`-step paths that end at `λ·1`.
pub fn estimate_return_prob(v: u32, k: u32, t: u64, samples: u64, seed: u64) -> Result<McResult> {
    check_exhaustive(v, k)?;
    if samples == 0 {
        return param("samples must be at least 1");
    }
    let derived = derive_params(&DesignParams::new(v, k, t)?);
    let hits = match derived.lambda_u64().filter(|_| derived.admissible) {
        None => 0,
        Some(lambda) => {
            let supports: Vec<Vec<usize>> = enumerate_columns(v, k)?
                .iter()
                .map(|c| c.pair_support())
                .collect();
            let d = pair_count(v);
            (0..SHARDS)
                .into_par_iter()
                .map(|s| {
                    let paths = samples / SHARDS + u64::from(s < samples % SHARDS);
                    shard_hits(&supports, d, lambda, t, paths, seed, s)
                })
                .sum()
        }
    };
    let (ci_low, ci_high) = wilson_interval(hits, samples, Z95);
    Ok(McResult {
        hits,
        samples,
        estimate: hits as f64 / samples as f64,
        ci_low,
        ci_high,
        seed,
    })
}
