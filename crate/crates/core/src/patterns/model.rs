use rand_distr::StandardNormal;

use super::Pattern;
use crate::error::{Error, Result};
use crate::numeric::{integrate_tol, ln_binomial, CompensatedSum};
use crate::order_stats::{Kind, ReliabilityDistributions};
use crate::stats::{shard_rng, SHARDS};
use rand::Rng;
use rayon::prelude::*;

/// Per-position flip probabilities over reliability-sorted positions, treated
/// as independent.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionErrorModel {
    p: Vec<f64>,
    /// `w_i = ln((1 - p_i) / p_i)`.
    w: Vec<f64>,
    /// `sum_i ln(1 - p_i)`, the log-probability of the zero pattern.
    ln_base: f64,
}

/// How [`position_error_probs`] obtains the probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelMethod {
    Integral,
    MonteCarlo { trials: u64, seed: u64 },
}

impl PositionErrorModel {
    /// Validates `0 < p_i < 1/2` and that `p` is non-increasing.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(bad) = p.iter().find(|&&x| !(x > 0.0 && x < 0.5)) {
            return Err(Error::InvalidIndex(format!("flip probability {bad} outside (0, 1/2)")));
        }
        if p.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidIndex("flip probabilities must be non-increasing".into()));
        }
        let w = p.iter().map(|&x| ((1.0 - x) / x).ln()).collect();
        let ln_base = p.iter().map(|&x| (-x).ln_1p()).sum::<CompensatedSum>().value();
        Ok(Self { p, w, ln_base })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn log_ratios(&self) -> &[f64] {
        &self.w
    }

    pub fn ln_base(&self) -> f64 {
        self.ln_base
    }

    /// `sum_{i in support} w_i`, so that `ln P(e = rho) = ln_base - cost`.
    pub fn cost(&self, pattern: &Pattern) -> f64 {
        pattern.support().iter().map(|&i| self.w[i - 1]).sum()
    }

    pub fn ln_pattern_prob(&self, pattern: &Pattern) -> f64 {
        self.ln_base - self.cost(pattern)
    }
}

/// Flip probability of every sorted position at noise level `sigma`.
pub fn position_error_probs(n: usize, sigma: f64, method: ModelMethod) -> Result<PositionErrorModel> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be positive".into()));
    }
    let p = match method {
        ModelMethod::Integral => position_error_probs_integral(n, sigma),
        ModelMethod::MonteCarlo { trials, seed } => position_error_probs_mc(n, sigma, trials, seed).0,
    };
    PositionErrorModel::new(monotone_clamped(p))
}

/// `p_i = int n C(n-1, i-1) p f_err(a) F(a)^(i-1) (1 - F(a))^(n-i) da` with
/// `F = p F_err + (1 - p) F_corr` the reliability CDF of a random position.
pub fn position_error_probs_integral(n: usize, sigma: f64) -> Vec<f64> {
    let d = ReliabilityDistributions::new(sigma);
    let p = d.flip_probability();
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    (1..=n)
        .into_par_iter()
        .map(|i| {
            let ln_coef = (n as f64).ln() + ln_binomial(n as u64 - 1, i as u64 - 1) + ln_p;
            let integrand = |a: f64| {
                let f = p * d.cdf(Kind::Error, a) + (1.0 - p) * d.cdf(Kind::Correct, a);
                let s = (ln_p + d.ln_cdf_sf(Kind::Error, a).1).exp() + (ln_q + d.ln_cdf_sf(Kind::Correct, a).1).exp();
                let mut ln = ln_coef + d.ln_density(Kind::Error, a);
                if i > 1 {
                    ln += (i - 1) as f64 * f.ln();
                }
                if n > i {
                    ln += (n - i) as f64 * s.ln();
                }
                ln.exp()
            };
            integrate_tol(integrand, 0.0, d.x_max(), 1e-300, 1e-10)
        })
        .collect()
}

/// Simulated per-position flip frequencies with their standard errors.
pub fn position_error_probs_mc(n: usize, sigma: f64, trials: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let per_shard = trials.div_ceil(SHARDS as u64);
    let counts = (0..SHARDS as u64)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(seed, 0x006d_6f64_656c, shard);
            let mut counts = vec![0u64; n];
            let mut y = vec![0.0f64; n];
            let mut order: Vec<usize> = (0..n).collect();
            for _ in 0..per_shard {
                for v in y.iter_mut() {
                    *v = 1.0 + sigma * rng.sample::<f64, _>(StandardNormal);
                }
                order.sort_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()));
                for (s, &i) in order.iter().enumerate() {
                    counts[s] += (y[i] < 0.0) as u64;
                }
            }
            counts
        })
        .reduce(|| vec![0u64; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let total = (per_shard * SHARDS as u64) as f64;
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let se = p.iter().map(|&x| (x * (1.0 - x) / total).sqrt()).collect();
    (p, se)
}

/// Pool-adjacent-violators fit to a non-increasing sequence, kept inside the
/// open interval a model needs.
fn monotone_clamped(p: Vec<f64>) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(p.len());
    for x in p {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if b <= a {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, k)| std::iter::repeat_n(v.clamp(1e-300, 0.5 - 1e-12), k))
        .collect()
}

/// `P(e = rho)` under the independence model.
pub fn pattern_prob(model: &PositionErrorModel, pattern: &Pattern) -> f64 {
    model.ln_pattern_prob(pattern).exp()
}

/// `P(e in B_t(rho))`: sums over `A` (support positions toggled off) and the
/// number of positions toggled on outside the support. Both factors are
/// elementary symmetric sums of terms at most one, so nothing overflows.
pub fn ball_prob(model: &PositionErrorModel, pattern: &Pattern, t: usize) -> f64 {
    let n = model.n();
    let w = model.log_ratios();
    let mut inside = vec![0.0f64; t + 1];
    inside[0] = 1.0;
    let mut outside = vec![0.0f64; t + 1];
    outside[0] = 1.0;
    let support = pattern.support();
    let mut k = 0;
    for i in 1..=n {
        if k < support.len() && support[k] == i {
            k += 1;
            // Kept: factor e^{-w_i}; toggled off: factor 1 and one more flip.
            let keep = (-w[i - 1]).exp();
            for j in (0..=t).rev() {
                inside[j] = inside[j] * keep + if j > 0 { inside[j - 1] } else { 0.0 };
            }
        } else {
            let r = (-w[i - 1]).exp();
            for j in (1..=t).rev() {
                outside[j] += r * outside[j - 1];
            }
        }
    }
    let mut cum = vec![0.0f64; t + 1];
    let mut acc = 0.0;
    for j in 0..=t {
        acc += outside[j];
        cum[j] = acc;
    }
    let total: f64 = (0..=t).map(|a| inside[a] * cum[t - a]).sum();
    model.ln_base().exp() * total
}
