//! BI-AWGN channel with BPSK (`0 -> +1`, `1 -> -1`), channel LLRs,
//! reliability sorting and closed-form bit-flip-count probabilities.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codes::Word;
use crate::numeric::{ln_binomial, q_func};

/// Noise level of a BI-AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub sigma: f64,
    pub ebn0_db: f64,
    pub rate: f64,
}

impl ChannelParams {
    /// `sigma^2 = 1 / (2 R Eb/N0)`.
    pub fn from_ebn0_db(ebn0_db: f64, rate: f64) -> Self {
        Self { sigma: sigma_from_ebn0_db(ebn0_db, rate), ebn0_db, rate }
    }

    /// Hard-decision flip probability `Q(1/sigma)`.
    pub fn flip_probability(&self) -> f64 {
        flip_probability(self.sigma)
    }
}

pub fn sigma_from_ebn0_db(ebn0_db: f64, rate: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    (1.0 / (2.0 * rate * ebn0)).sqrt()
}

pub fn flip_probability(sigma: f64) -> f64 {
    q_func(1.0 / sigma)
}

/// BPSK-modulates `codeword` and adds white Gaussian noise.
pub fn transmit<R: Rng + ?Sized>(codeword: &Word, sigma: f64, rng: &mut R) -> Vec<f64> {
    codeword
        .bits()
        .iter()
        .map(|&c| {
            let x = if c == 0 { 1.0 } else { -1.0 };
            let z: f64 = rng.sample(StandardNormal);
            x + sigma * z
        })
        .collect()
}

/// Channel LLRs `2 y / sigma^2`.
pub fn llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// Hard decision: 1 where the value is negative.
pub fn hard_decision(values: &[f64]) -> Word {
    Word::from_bits(values.iter().map(|&v| (v < 0.0) as u8))
}

/// One channel realization with positions sorted by ascending reliability.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedReceived {
    /// LLRs in ascending order of magnitude.
    pub llr_sorted: Vec<f64>,
    /// `permutation[s]` is the original index of sorted position `s` (0-based).
    pub permutation: Vec<usize>,
    pub hard_decision_sorted: Vec<u8>,
    /// Reliabilities `|l|`, non-decreasing.
    pub alpha: Vec<f64>,
}

impl SortedReceived {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Puts values given in sorted order back into original order.
    pub fn unsort<T: Copy + Default>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); sorted.len()];
        for (s, &orig) in self.permutation.iter().enumerate() {
            out[orig] = sorted[s];
        }
        out
    }
}

/// Sorts positions by `|l|`; ties keep original index order.
pub fn sort_by_reliability(llr: &[f64]) -> SortedReceived {
    let mut permutation: Vec<usize> = (0..llr.len()).collect();
    permutation.sort_by(|&a, &b| llr[a].abs().total_cmp(&llr[b].abs()));
    let llr_sorted: Vec<f64> = permutation.iter().map(|&i| llr[i]).collect();
    let hard_decision_sorted = llr_sorted.iter().map(|&l| (l < 0.0) as u8).collect();
    let alpha = llr_sorted.iter().map(|l| l.abs()).collect();
    SortedReceived { llr_sorted, permutation, hard_decision_sorted, alpha }
}

/// Probability of exactly `b` hard-decision errors among `n` positions:
/// `C(n,b) p^b (1-p)^(n-b)` with `p = Q(1/sigma)`.
pub fn prob_flips(n: usize, b: usize, sigma: f64) -> f64 {
    if b > n {
        return 0.0;
    }
    let p = flip_probability(sigma);
    if p == 0.0 {
        return if b == 0 { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n as u64, b as u64) + b as f64 * p.ln() + (n - b) as f64 * (-p).ln_1p();
    ln.exp()
}

/// Success probability of a radius-`t` bounded-distance decoder.
pub fn prob_bdd(n: usize, t: usize, sigma: f64) -> f64 {
    (0..=t.min(n)).map(|i| prob_flips(n, i, sigma)).sum::<f64>().min(1.0)
}
