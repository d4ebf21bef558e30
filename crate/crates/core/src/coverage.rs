//! Probability mass of a union of Hamming balls under a product measure.
//!
//! Vectors are flip sets `u` over positions `1..=n` with
//! `ln P(u) = ln_base - sum_{i in u} cost_i`. For a channel realization the
//! cost of a sorted position is its reliability `|l|`; for a position model
//! it is the log-ratio `ln((1 - p_i) / p_i)`.
//!
//! The union is split into the parts each center adds to the balls of the
//! centers before it. Around a center `c`, only earlier centers within `2t`
//! interact. Let `U` be the positions where `c` or any of them is set. A ball
//! member is `c + K_in + K_out` with `K_in` inside `U` and `K_out` outside, and
//! its distance to an earlier center `o` is `|(c + o) + K_in| + |K_out|`. So
//! the admissible sizes of `K_out` depend only on `K_in`, and the sum over
//! `K_out` is an elementary symmetric sum of `e^{-cost}` over the positions
//! outside `U`. None of this depends on the costs, so it is planned once.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::patterns::{combinations, sym_diff, sym_diff_len, Pattern};

/// Default cap on enumeration work.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    /// Flip set `c + K_in`.
    flips: Vec<usize>,
    s_min: usize,
    s_max: usize,
}

/// Planned contribution of one center.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterPlan {
    /// Sorted local positions `U`.
    local: Vec<usize>,
    entries: Vec<Entry>,
}

impl CenterPlan {
    /// Plans the part of `B_t(center)` outside every ball around `others`.
    pub fn new<'a, I>(center: &Pattern, others: I, t: usize) -> Self
    where
        I: IntoIterator<Item = &'a Pattern>,
    {
        let c = center.support();
        let diffs: Vec<Vec<usize>> = others
            .into_iter()
            .filter(|o| sym_diff_len(c, o.support(), 2 * t + 1) <= 2 * t)
            .map(|o| sym_diff(c, o.support()))
            .collect();
        let mut local: Vec<usize> = c.to_vec();
        for d in &diffs {
            local = sym_union(&local, d);
        }
        let mut entries = Vec::new();
        for size in 0..=t.min(local.len()) {
            for idx in combinations(local.len(), size) {
                let k_in: Vec<usize> = idx.iter().map(|&j| local[j - 1]).collect();
                let need = diffs.iter().map(|d| sym_diff_len(d, &k_in, t + 1)).min().unwrap_or(t + 1);
                let s_min = (t + 1).saturating_sub(need);
                let s_max = t - size;
                if s_min <= s_max {
                    entries.push(Entry { flips: sym_diff(c, &k_in), s_min, s_max });
                }
            }
        }
        Self { local, entries }
    }

    fn work(&self) -> u64 {
        self.entries.len() as u64
    }

    /// Mass added by this center under the measure `(costs, ln_base)`.
    pub fn mass(&self, costs: &[f64], ln_base: f64, t: usize) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        // Elementary symmetric sums of e^{-cost} outside the local set.
        let mut e = vec![0.0f64; t + 1];
        e[0] = 1.0;
        let mut k = 0;
        for (i, &cost) in costs.iter().enumerate() {
            let pos = i + 1;
            if k < self.local.len() && self.local[k] == pos {
                k += 1;
                continue;
            }
            let r = (-cost).exp();
            for j in (1..=t).rev() {
                e[j] += r * e[j - 1];
            }
        }
        let mut total = CompensatedSum::new();
        for entry in &self.entries {
            let tail: f64 = e[entry.s_min..=entry.s_max].iter().sum();
            if tail == 0.0 {
                continue;
            }
            let cost: f64 = entry.flips.iter().map(|&i| costs[i - 1]).sum();
            total.add((ln_base - cost).exp() * tail);
        }
        total.value()
    }
}

fn sym_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Union of radius-`t` balls around an ordered list of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverPlan {
    n: usize,
    t: usize,
    centers: Vec<CenterPlan>,
}

impl CoverPlan {
    pub fn new(centers: &[Pattern], n: usize, t: usize, budget: u64) -> Result<Self> {
        if let Some(bad) = centers.iter().filter_map(Pattern::i_max).find(|&i| i > n) {
            return Err(Error::InvalidPattern(format!("position {bad} exceeds n={n}")));
        }
        let mut plans = Vec::with_capacity(centers.len());
        let mut work = 0u64;
        for (k, c) in centers.iter().enumerate() {
            let plan = CenterPlan::new(c, &centers[..k], t);
            work += plan.work();
            if work > budget {
                return Err(Error::BudgetExceeded { needed: work, budget });
            }
            plans.push(plan);
        }
        Ok(Self { n, t, centers: plans })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Mass newly covered by each center, in order.
    pub fn increments(&self, costs: &[f64], ln_base: f64) -> Vec<f64> {
        assert_eq!(costs.len(), self.n, "cost vector length");
        self.centers.iter().map(|c| c.mass(costs, ln_base, self.t)).collect()
    }

    /// Mass of the whole union.
    pub fn mass(&self, costs: &[f64], ln_base: f64) -> f64 {
        self.increments(costs, ln_base).into_iter().sum::<CompensatedSum>().value().min(1.0)
    }
}

/// Costs and normalizer of the posterior flip measure of one realization:
/// a sorted position with reliability `a` flips with probability
/// `1 / (1 + e^a)`.
pub fn realization_measure(alpha: &[f64]) -> (Vec<f64>, f64) {
    let ln_base = -alpha.iter().map(|&a| (-a).exp().ln_1p()).sum::<CompensatedSum>().value();
    (alpha.to_vec(), ln_base)
}

/// Union mass by listing every covered flip set. Reference implementation.
pub fn covered_mass_enumerated(
    centers: &[Pattern],
    n: usize,
    t: usize,
    costs: &[f64],
    ln_base: f64,
    budget: u64,
) -> Result<f64> {
    let ball: u64 = (0..=t.min(n)).map(|j| binomial(n, j)).sum();
    let needed = ball.saturating_mul(centers.len() as u64);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut total = CompensatedSum::new();
    for c in centers {
        for size in 0..=t.min(n) {
            for k in combinations(n, size) {
                let u = sym_diff(c.support(), &k);
                let cost: f64 = u.iter().map(|&i| costs[i - 1]).sum();
                if seen.insert(u) {
                    total.add((ln_base - cost).exp());
                }
            }
        }
    }
    Ok(total.value())
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}
