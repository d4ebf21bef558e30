//! Estimates with error bars and deterministic sharded Monte Carlo.
//!
//! Random streams are derived from `(seed, stream id, shard id)` so results
//! depend only on those values and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A probability estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, samples: 0 }
    }

    /// Binomial proportion `hits / trials`.
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { value: 0.0, stderr: 0.0, samples: 0 };
        }
        let p = hits as f64 / trials as f64;
        Self { value: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), samples: trials }
    }

    /// Sample mean with the standard error of the mean.
    pub fn from_moments(sum: f64, sum_sq: f64, samples: u64) -> Self {
        if samples == 0 {
            return Self { value: 0.0, stderr: 0.0, samples: 0 };
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Self { value: mean, stderr: (var / n).sqrt(), samples }
    }

    pub fn relative_stderr(&self) -> f64 {
        if self.value > 0.0 {
            self.stderr / self.value
        } else {
            f64::INFINITY
        }
    }

    /// Whether two estimates agree within `max(rel_tol * larger, k * combined stderr)`.
    pub fn agrees_with(&self, other: &Estimate, rel_tol: f64, k_sigma: f64) -> bool {
        let diff = (self.value - other.value).abs();
        let combined = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        diff <= (rel_tol * self.value.max(other.value)).max(k_sigma * combined)
    }
}

/// Number of independent random streams used for sharded sampling.
pub const SHARDS: usize = 16;

/// RNG for one shard of one sampling job.
pub fn shard_rng(seed: u64, stream: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(shard);
    rng
}

/// Estimates the probability of an event by repeated independent trials.
///
/// Runs in rounds of `SHARDS * batch` trials until `max_trials` is reached
/// or, once at least `min_trials` have run, the relative standard error of
/// the estimate drops below `target_rel_se`.
pub fn estimate_probability<F>(
    seed: u64,
    stream: u64,
    min_trials: u64,
    max_trials: u64,
    target_rel_se: f64,
    event: F,
) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let mut rngs: Vec<ChaCha8Rng> = (0..SHARDS as u64).map(|s| shard_rng(seed, stream, s)).collect();
    let batch = 1000u64;
    let mut hits = 0u64;
    let mut trials = 0u64;
    while trials < max_trials {
        let per_shard = batch.min((max_trials - trials).div_ceil(SHARDS as u64)).max(1);
        hits += rngs
            .par_iter_mut()
            .map(|rng| (0..per_shard).filter(|_| event(rng)).count() as u64)
            .sum::<u64>();
        trials += per_shard * SHARDS as u64;
        if trials >= min_trials && hits > 0 {
            let est = Estimate::from_counts(hits, trials);
            if est.relative_stderr() < target_rel_se {
                break;
            }
        }
    }
    Estimate::from_counts(hits, trials)
}
