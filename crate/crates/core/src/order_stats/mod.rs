//! Order statistics of reliabilities and the closed-form list-error-rate
//! evaluators for Chase, restricted Chase and logistic-weight pattern sets.

mod chain;
mod dist;

pub use chain::{build_constraint_chain, Condition, ConstraintChain};
pub use dist::{Kind, ReliabilityDistributions};

use std::collections::HashSet;

use rand::Rng;
use rand_distr::Exp1;

use crate::channel::prob_flips;
use crate::error::{Error, Result};
use crate::numeric::{integrate_tol, CompensatedSum};
use crate::patterns::PatternSet;
use crate::stats::{estimate_probability, Estimate};

/// Terms with `P(E_b)` below this are dropped from the series.
pub const PROB_FLOOR: f64 = 1e-18;
/// Default trial budget for Monte Carlo constraint probabilities.
pub const DEFAULT_TRIALS: u64 = 1_000_000;
const MIN_TRIALS: u64 = 10_000;
const TARGET_REL_SE: f64 = 0.01;

/// A sorted uniform together with its complement, each computed without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Uniform {
    u: f64,
    s: f64,
}

impl Uniform {
    fn invert(self, dist: &ReliabilityDistributions, kind: Kind) -> f64 {
        if self.u <= 0.5 {
            dist.inverse_cdf(kind, self.u)
        } else {
            dist.inverse_sf(kind, self.s)
        }
    }
}

/// All `count` sorted uniforms from normalized exponential spacings.
fn sorted_uniforms<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Uniform> {
    let spacings: Vec<f64> = (0..=count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = spacings.iter().sum();
    let mut out = Vec::with_capacity(count);
    let mut below = 0.0;
    let mut above: f64 = spacings[1..].iter().sum();
    for k in 0..count {
        below += spacings[k];
        if k > 0 {
            above -= spacings[k];
        }
        out.push(Uniform { u: below / total, s: above / total });
    }
    out
}

/// Generates the smallest sorted uniforms of `count` one at a time: given
/// `U_(j)`, the next is `1 - (1 - U_(j)) V^(1/(count - j))`.
struct LowerUniforms {
    count: usize,
    produced: usize,
    cur: Uniform,
}

impl LowerUniforms {
    fn new(count: usize) -> Self {
        Self { count, produced: 0, cur: Uniform { u: 0.0, s: 1.0 } }
    }

    fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Uniform> {
        if self.produced == self.count {
            return None;
        }
        let v: f64 = 1.0 - rng.random::<f64>();
        let ln_step = v.ln() / (self.count - self.produced) as f64;
        let gap = self.cur.s * -ln_step.exp_m1();
        self.cur = Uniform { u: self.cur.u + gap, s: self.cur.s * ln_step.exp() };
        self.produced += 1;
        Some(self.cur)
    }
}

/// Ascending sample of the joint order statistics of `count` reliabilities.
pub fn sample_ordered<R: Rng + ?Sized>(
    dist: &ReliabilityDistributions,
    kind: Kind,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    sorted_uniforms(count, rng).into_iter().map(|v| v.invert(dist, kind)).collect()
}

/// Smallest `k` of `count` order statistics, generated sequentially.
pub fn sample_ordered_lowest<R: Rng + ?Sized>(
    dist: &ReliabilityDistributions,
    kind: Kind,
    count: usize,
    k: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut gen = LowerUniforms::new(count);
    (0..k.min(count)).map(|_| gen.next(rng).expect("k <= count").invert(dist, kind)).collect()
}

/// Monte Carlo probability, over `trials` draws, that ordered error and
/// correct reliabilities satisfy every condition of `chain`.
///
/// Only the order statistics the chain mentions are generated. Correct
/// reliabilities stay on the uniform scale: `beta <= gamma` is tested as
/// `F_c(beta) <= U`, which avoids inverting the correct-position CDF.
pub fn constraint_prob_mc(chain: &ConstraintChain, sigma: f64, trials: u64, seed: u64) -> Estimate {
    if !chain.feasible {
        return Estimate::exact(0.0);
    }
    if chain.conditions.is_empty() {
        return Estimate::exact(1.0);
    }
    let dist = ReliabilityDistributions::new(sigma);
    let beta_needed = chain.beta_indices().last().copied().unwrap_or(0);
    let gamma_needed = chain.gamma_indices().last().copied().unwrap_or(0);
    let (b, m) = (chain.b, chain.n - chain.b);
    let stream = chain_stream_id(chain);
    estimate_probability(seed, stream, trials, trials, 0.0, |rng| {
        let mut errs = LowerUniforms::new(b);
        let beta: Vec<f64> = (0..beta_needed)
            .map(|_| dist.cdf(Kind::Correct, errs.next(rng).expect("index within b").invert(&dist, Kind::Error)))
            .collect();
        let mut corr = LowerUniforms::new(m);
        let gamma: Vec<f64> = (0..gamma_needed).map(|_| corr.next(rng).expect("index within n-b").u).collect();
        chain.satisfied_by(&beta, &gamma)
    })
}

fn chain_stream_id(chain: &ConstraintChain) -> u64 {
    chain.conditions.iter().fold((chain.n as u64) << 32 | chain.b as u64, |h, c| {
        let (tag, i, j) = match *c {
            Condition::BetaBelowGamma { i, j } => (1u64, i, j),
            Condition::GammaBelowBeta { j, i } => (2u64, i, j),
        };
        (h.rotate_left(13) ^ (tag << 40 | (i as u64) << 20 | j as u64)).wrapping_mul(0x100_0000_01B3)
    })
}

/// `P(beta_(i) >= gamma_(j))` for `b` errors among `n`; zero when `j > n - b`.
fn order_miss_prob(dist: &ReliabilityDistributions, n: usize, b: usize, i: usize, j: usize) -> f64 {
    if j > n - b {
        return 0.0;
    }
    let m = n - b;
    integrate_tol(
        |x| dist.os_density(Kind::Error, b, i, x) * dist.os_cdf(Kind::Correct, m, j, x),
        0.0,
        dist.x_max(),
        1e-300,
        1e-9,
    )
    .clamp(0.0, 1.0)
}

fn check_prefix_args(n: usize, b: usize, t: usize, p: usize) -> Result<()> {
    if p > n || b > n {
        return Err(Error::InvalidIndex(format!("need p <= n and b <= n (n={n}, b={b}, p={p})")));
    }
    if b <= t || b > p + t {
        return Err(Error::InvalidIndex(format!("need t < b <= p + t (b={b}, t={t}, p={p})")));
    }
    Ok(())
}

/// Probability that at least `b - t` of the `b` errors lie among the `p`
/// least reliable positions, i.e. `beta_(b-t) <= gamma_(p+t+1-b)`.
pub fn cond_prob_weight_in_prefix(n: usize, b: usize, t: usize, p: usize, sigma: f64) -> Result<f64> {
    check_prefix_args(n, b, t, p)?;
    let dist = ReliabilityDistributions::new(sigma);
    Ok(1.0 - order_miss_prob(&dist, n, b, b - t, p + t + 1 - b))
}

/// List error rate of the full Chase set on the `p` least reliable positions.
pub fn ler_chase(n: usize, t: usize, sigma: f64, p: usize) -> Result<f64> {
    ler_restricted(n, t, sigma, p, p)
}

/// List error rate of all patterns of weight at most `w_max` on the `p`
/// least reliable positions.
///
/// Evaluated as `sum_b P(E_b) P(miss | E_b)` so small rates are not lost to
/// cancellation against `P_BDD`.
pub fn ler_restricted(n: usize, t: usize, sigma: f64, p: usize, w_max: usize) -> Result<f64> {
    if w_max > p || p > n {
        return Err(Error::InvalidIndex(format!("need w_max <= p <= n (w_max={w_max}, p={p}, n={n})")));
    }
    let dist = ReliabilityDistributions::new(sigma);
    let mut total = CompensatedSum::new();
    for b in (t + 1)..=n {
        let pe = prob_flips(n, b, sigma);
        if pe < PROB_FLOOR {
            continue;
        }
        let miss = if b <= w_max + t { order_miss_prob(&dist, n, b, b - t, p + t + 1 - b) } else { 1.0 };
        total.add(pe * miss);
    }
    Ok(total.value().clamp(0.0, 1.0))
}

/// Checks the structure the logistic-weight evaluator relies on: the zero
/// pattern is present and the set is closed under taking sub-patterns and
/// under moving a position to a free less reliable one. Under these, a
/// weight-`b` error vector is covered exactly when its `b - t` least
/// reliable errors form a member.
pub fn validate_lw_structure(set: &PatternSet) -> Result<()> {
    if !set.contains(&crate::patterns::Pattern::zero()) {
        return Err(Error::NotLogisticWeightSet("zero pattern missing".into()));
    }
    if !set.is_subpattern_closed() {
        return Err(Error::NotLogisticWeightSet("not closed under sub-patterns".into()));
    }
    if !set.is_left_shift_closed() {
        return Err(Error::NotLogisticWeightSet("not closed under moves to less reliable positions".into()));
    }
    Ok(())
}

/// List error rate of a logistic-weight pattern set.
///
/// For each error count `b`, patterns of weight `b - t` cover disjoint events
/// (the error vector agrees with the pattern up to its last set position), so
/// their constraint probabilities add up to the probability that the
/// positions of the `b - t` least reliable errors form a member. That sum is
/// estimated in one sampling run per `b`, and the miss probabilities are
/// combined with `P(E_b)` and their standard errors.
pub fn ler_lw(n: usize, t: usize, sigma: f64, set: &PatternSet, trials: u64, seed: u64) -> Result<Estimate> {
    if set.n() > n {
        return Err(Error::LengthMismatch { expected: n, actual: set.n() });
    }
    validate_lw_structure(set)?;
    let dist = ReliabilityDistributions::new(sigma);
    let w_max = set.max_weight();
    let reach = set.iter().filter_map(|p| p.i_max()).max().unwrap_or(0);
    let mut value = CompensatedSum::new();
    let mut var = 0.0;
    let mut samples = 0;
    for b in (t + 1)..=n {
        let pe = prob_flips(n, b, sigma);
        if pe < PROB_FLOOR {
            continue;
        }
        let w = b - t;
        if w > w_max {
            value.add(pe);
            continue;
        }
        let members: HashSet<Vec<usize>> =
            set.iter().filter(|p| p.hamming_weight() == w).map(|p| p.support().to_vec()).collect();
        let miss = estimate_probability(seed, b as u64, MIN_TRIALS.min(trials), trials, TARGET_REL_SE, |rng| {
            !leading_errors_form_member(&dist, n, b, w, reach, &members, rng)
        });
        value.add(pe * miss.value);
        var += (pe * miss.stderr).powi(2);
        samples += miss.samples;
    }
    Ok(Estimate { value: value.value().clamp(0.0, 1.0), stderr: var.sqrt(), samples })
}

/// Samples `b` error and `n - b` correct reliabilities (only as many as
/// needed) and tests whether the sorted positions of the `w` least reliable
/// errors form a member of `members`. Positions beyond `reach` are misses.
fn leading_errors_form_member<R: Rng + ?Sized>(
    dist: &ReliabilityDistributions,
    n: usize,
    b: usize,
    w: usize,
    reach: usize,
    members: &HashSet<Vec<usize>>,
    rng: &mut R,
) -> bool {
    let mut errs = LowerUniforms::new(b);
    let mut corr = LowerUniforms::new(n - b);
    let mut next_corr = corr.next(rng);
    let mut correct_below = 0;
    let mut support = Vec::with_capacity(w);
    for k in 1..=w {
        let level = dist.cdf(Kind::Correct, errs.next(rng).expect("w <= b").invert(dist, Kind::Error));
        while let Some(g) = next_corr {
            if g.u >= level {
                break;
            }
            correct_below += 1;
            if k + correct_below > reach {
                return false;
            }
            next_corr = corr.next(rng);
        }
        let pos = k + correct_below;
        if pos > reach {
            return false;
        }
        support.push(pos);
    }
    members.contains(&support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{prob_bdd, sigma_from_ebn0_db};
    use crate::patterns::{gen_chase, gen_lw, gen_restricted, Pattern};
    use crate::stats::shard_rng;

    #[test]
    fn sorted_uniforms_are_consistent() {
        let mut rng = shard_rng(3, 0, 0);
        for _ in 0..100 {
            let v = sorted_uniforms(12, &mut rng);
            assert!(v.windows(2).all(|w| w[0].u <= w[1].u));
            assert!(v.iter().all(|x| (x.u + x.s - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn lower_uniforms_match_full_construction_in_mean() {
        // E[U_(j)] = j / (count + 1).
        let mut rng = shard_rng(4, 0, 0);
        let count = 9;
        let mut sums = [0.0; 3];
        let trials = 100_000;
        for _ in 0..trials {
            let mut g = LowerUniforms::new(count);
            for s in sums.iter_mut() {
                *s += g.next(&mut rng).unwrap().u;
            }
        }
        for (j, s) in sums.iter().enumerate() {
            let mean = s / trials as f64;
            let expect = (j + 1) as f64 / (count + 1) as f64;
            assert!((mean - expect).abs() < 0.003, "j={j} {mean} vs {expect}");
        }
    }

    #[test]
    fn sample_ordered_is_non_decreasing() {
        let d = ReliabilityDistributions::new(0.7);
        let mut rng = shard_rng(5, 0, 0);
        for kind in [Kind::Error, Kind::Correct] {
            for _ in 0..200 {
                let v = sample_ordered(&d, kind, 20, &mut rng);
                assert!(v.windows(2).all(|w| w[0] <= w[1]));
                assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
            }
        }
    }

    #[test]
    fn empty_and_infeasible_chains_are_exact() {
        let e = constraint_prob_mc(&ConstraintChain::unconstrained(7, 2), 0.7, 10_000, 1);
        assert_eq!(e, Estimate::exact(1.0));
        let rho = Pattern::new(vec![4]).unwrap();
        let chain = build_constraint_chain(&rho, 5, 3).unwrap();
        assert_eq!(constraint_prob_mc(&chain, 0.7, 10_000, 1).value, 0.0);
    }

    #[test]
    fn prefix_probability_edge_and_errors() {
        assert!((cond_prob_weight_in_prefix(15, 4, 1, 15, 0.6).unwrap() - 1.0).abs() < 1e-15);
        assert!(cond_prob_weight_in_prefix(15, 1, 1, 5, 0.6).is_err());
        assert!(cond_prob_weight_in_prefix(15, 8, 1, 5, 0.6).is_err());
    }

    #[test]
    fn prefix_probability_matches_sampling() {
        // Draw every reliability, sort jointly, count errors in the prefix.
        let (n, b, t, p) = (31, 3, 1, 4);
        let sigma = 0.6;
        let d = ReliabilityDistributions::new(sigma);
        let exact = cond_prob_weight_in_prefix(n, b, t, p, sigma).unwrap();
        let est = estimate_probability(11, 0, 200_000, 200_000, 0.0, |rng| {
            let mut all: Vec<(f64, bool)> = Vec::with_capacity(n);
            all.extend(sample_ordered(&d, Kind::Error, b, rng).into_iter().map(|x| (x, true)));
            all.extend(sample_ordered(&d, Kind::Correct, n - b, rng).into_iter().map(|x| (x, false)));
            all.sort_by(|a, c| a.0.total_cmp(&c.0));
            all[..p].iter().filter(|e| e.1).count() >= b - t
        });
        assert!((est.value - exact).abs() < 3.0 * est.stderr + 1e-9, "{est:?} vs {exact}");
    }

    #[test]
    fn single_condition_chain_matches_prefix_integral() {
        let (n, b, t, p) = (31, 3, 1, 4);
        let sigma = 0.6;
        let chain = ConstraintChain::single(n, b, b - t, p + t + 1 - b);
        let mc = constraint_prob_mc(&chain, sigma, 1_000_000, 2);
        let exact = cond_prob_weight_in_prefix(n, b, t, p, sigma).unwrap();
        assert!((mc.value - exact).abs() < 3.0 * mc.stderr, "{mc:?} vs {exact}");
    }

    #[test]
    fn chase_equals_full_restriction_and_limits() {
        let sigma = sigma_from_ebn0_db(4.0, 120.0 / 128.0);
        let a = ler_chase(128, 1, sigma, 5).unwrap();
        let b = ler_restricted(128, 1, sigma, 5, 5).unwrap();
        assert_eq!(a, b);
        let bdd_fail = 1.0 - prob_bdd(128, 1, sigma);
        let r0 = ler_restricted(128, 1, sigma, 5, 0).unwrap();
        assert!((r0 / bdd_fail - 1.0).abs() < 1e-9, "{r0} vs {bdd_fail}");
        assert!(a < r0);
        // Nested sets never do worse.
        let r2 = ler_restricted(128, 1, sigma, 5, 2).unwrap();
        assert!(a <= r2 && r2 <= r0);
        // Whole space searched: only high-weight errors remain, vanishing with noise.
        let tiny = ler_chase(15, 1, 0.2, 14).unwrap();
        assert!(tiny < 1e-12, "{tiny}");
    }

    #[test]
    fn lw_trivial_sets() {
        let sigma = 0.55;
        let zero = PatternSet::new(15, vec![Pattern::zero()]).unwrap();
        let e = ler_lw(15, 1, sigma, &zero, 10_000, 1).unwrap();
        assert!((e.value / (1.0 - prob_bdd(15, 1, sigma)) - 1.0).abs() < 1e-9);
        let one = gen_lw(15, 2);
        let e = ler_lw(15, 1, sigma, &one, 1_000_000, 1).unwrap();
        let chase1 = ler_chase(15, 1, sigma, 1).unwrap();
        assert!((e.value - chase1).abs() < 3.0 * e.stderr, "{e:?} vs {chase1}");
    }

    #[test]
    fn lw_evaluator_reproduces_restricted_sets() {
        // Chase and restricted sets have the structure the evaluator needs.
        let n = 31;
        let sigma = 0.5;
        let set = gen_restricted(6, 2).with_length(n).unwrap();
        let e = ler_lw(n, 1, sigma, &set, 1_000_000, 3).unwrap();
        let r = ler_restricted(n, 1, sigma, 6, 2).unwrap();
        assert!((e.value - r).abs() < 3.0 * e.stderr, "{e:?} vs {r}");
        let set = gen_chase(4).with_length(n).unwrap();
        let e = ler_lw(n, 2, sigma, &set, 1_000_000, 3).unwrap();
        let r = ler_chase(n, 2, sigma, 4).unwrap();
        assert!((e.value - r).abs() < 3.0 * e.stderr, "{e:?} vs {r}");
    }

    #[test]
    fn lw_rejects_unstructured_sets() {
        let bad = PatternSet::new(8, vec![Pattern::zero(), Pattern::new(vec![3]).unwrap()]).unwrap();
        assert!(matches!(ler_lw(8, 1, 0.5, &bad, 10_000, 0), Err(Error::NotLogisticWeightSet(_))));
        let no_zero = PatternSet::new(8, vec![Pattern::new(vec![1]).unwrap()]).unwrap();
        assert!(matches!(ler_lw(8, 1, 0.5, &no_zero, 10_000, 0), Err(Error::NotLogisticWeightSet(_))));
    }

    #[test]
    fn per_pattern_chains_partition_the_prefix_event() {
        // Chains of all weight-w Chase patterns on the prefix add up to the
        // probability of at least w errors there.
        let (n, t, p, w) = (15, 1, 4, 2);
        let b = t + w;
        let sigma = 0.6;
        let chase = gen_chase(p);
        let mut sum = 0.0;
        let mut var = 0.0;
        for (k, rho) in chase.iter().filter(|r| r.hamming_weight() == w).enumerate() {
            let chain = build_constraint_chain(rho, n, b).unwrap();
            let e = constraint_prob_mc(&chain, sigma, 400_000, 100 + k as u64);
            sum += e.value;
            var += e.stderr * e.stderr;
        }
        let exact = cond_prob_weight_in_prefix(n, b, t, p, sigma).unwrap();
        assert!((sum - exact).abs() < 3.0 * var.sqrt() + 1e-9, "{sum} vs {exact}");
    }
}
