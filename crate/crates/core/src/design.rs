//! Pattern-set design under the independent position model: the gain of
//! adding a pattern, lazy greedy selection and the maximally covering
//! ordered-candidate construction.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::coverage::CenterPlan;
use crate::error::{Error, Result};
use crate::patterns::{ocp_ball_stream, ocp_stream, Pattern, PatternSet, PositionErrorModel};

/// Candidates drawn per requested pattern when no horizon is given.
pub const HORIZON_PER_PATTERN: usize = 64;

/// Probability of the part of `B_t(candidate)` not already within `t` of a
/// pattern in `current`.
pub fn added_prob(model: &PositionErrorModel, t: usize, current: &[Pattern], candidate: &Pattern) -> f64 {
    CenterPlan::new(candidate, current, t).mass(model.log_ratios(), model.ln_base(), t)
}

#[derive(Debug, Clone, Copy)]
struct Bound {
    value: f64,
    round: usize,
    idx: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Bound {}
impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Bound {
    // Larger value first, then earlier stream position.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(other.idx.cmp(&self.idx))
    }
}

/// Largest horizon tried when none is given.
pub const MAX_AUTO_HORIZON: usize = 1 << 22;

/// Runs `design` with the given horizon, or, without one, with horizons
/// doubling from `HORIZON_PER_PATTERN * q` until the pruning bound holds.
fn with_horizon<F>(model: &PositionErrorModel, q: usize, horizon: Option<usize>, design: F) -> Result<PatternSet>
where
    F: Fn(usize) -> Result<PatternSet>,
{
    if let Some(h) = horizon {
        return design(h);
    }
    let space = 1usize.checked_shl(model.n() as u32).unwrap_or(usize::MAX);
    let mut h = HORIZON_PER_PATTERN.saturating_mul(q).max(1);
    loop {
        match design(h) {
            Err(Error::HorizonExhausted { .. }) if h < space.min(MAX_AUTO_HORIZON) => {
                h = h.saturating_mul(2).min(space).min(MAX_AUTO_HORIZON);
            }
            other => return other,
        }
    }
}

/// Greedy design: each round adds the candidate with the largest added
/// probability. Candidates come from the ball-ranked stream; stale gains
/// are kept in a max-heap and only recomputed when they reach the top, which
/// is exact because gains can only shrink as the set grows.
///
/// A round whose best gain is below the smallest ball probability in the
/// horizon cannot rule out candidates beyond it. With an explicit horizon
/// that is an [`Error::HorizonExhausted`]; without one the horizon is doubled
/// and the design restarted.
pub fn greedy_design(model: &PositionErrorModel, t: usize, q: usize, horizon: Option<usize>) -> Result<PatternSet> {
    with_horizon(model, q, horizon, |h| greedy_lazy(model, t, q, h))
}

fn greedy_lazy(model: &PositionErrorModel, t: usize, q: usize, horizon: usize) -> Result<PatternSet> {
    let stream = ocp_ball_stream(model, t, horizon);
    let candidates = stream.candidates();
    let mut heap: BinaryHeap<Bound> =
        candidates.iter().enumerate().map(|(idx, c)| Bound { value: c.1, round: 0, idx }).collect();
    let mut chosen: Vec<Pattern> = Vec::with_capacity(q);
    for round in 1..=q {
        let pick = loop {
            let Some(top) = heap.pop() else {
                return Err(Error::HorizonExhausted { horizon });
            };
            if top.round == round {
                break top;
            }
            let value = added_prob(model, t, &chosen, &candidates[top.idx].0);
            heap.push(Bound { value, round, idx: top.idx });
        };
        if !stream.is_complete() && pick.value < stream.floor() {
            return Err(Error::HorizonExhausted { horizon });
        }
        chosen.push(candidates[pick.idx].0.clone());
    }
    let set = PatternSet::new(model.n(), chosen)?;
    Ok(set.with_comment(format!("design=greedy t={t} q={q} horizon={horizon}")))
}

/// Greedy design with the plain sequential scan: in each round, walk the
/// ball-ranked stream and stop once the best gain so far is at least the
/// next candidate's ball probability.
pub fn greedy_design_sequential(
    model: &PositionErrorModel,
    t: usize,
    q: usize,
    horizon: Option<usize>,
) -> Result<PatternSet> {
    with_horizon(model, q, horizon, |h| greedy_scan(model, t, q, h))
}

fn greedy_scan(model: &PositionErrorModel, t: usize, q: usize, horizon: usize) -> Result<PatternSet> {
    let stream = ocp_ball_stream(model, t, horizon);
    let candidates = stream.candidates();
    let mut taken = vec![false; candidates.len()];
    let mut chosen: Vec<Pattern> = Vec::with_capacity(q);
    for _ in 0..q {
        let mut best: Option<(usize, f64)> = None;
        let mut bound_fired = false;
        for (idx, (cand, ball)) in candidates.iter().enumerate() {
            if taken[idx] {
                continue;
            }
            if let Some((_, gain)) = best {
                if gain >= *ball {
                    bound_fired = true;
                    break;
                }
            }
            let gain = added_prob(model, t, &chosen, cand);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((idx, gain));
            }
        }
        let Some((idx, _)) = best else {
            return Err(Error::HorizonExhausted { horizon });
        };
        if !bound_fired && !stream.is_complete() {
            return Err(Error::HorizonExhausted { horizon });
        }
        taken[idx] = true;
        chosen.push(candidates[idx].0.clone());
    }
    let set = PatternSet::new(model.n(), chosen)?;
    Ok(set.with_comment(format!("design=greedy-scan t={t} q={q} horizon={horizon}")))
}

/// Result of [`mcoc_design_traced`].
#[derive(Debug, Clone)]
pub struct McocOutcome {
    pub set: PatternSet,
    /// Number of stream patterns examined.
    pub examined: usize,
}

/// Maximally covering ordered candidates: walk the probability-ordered
/// stream; whenever a pattern is farther than `t` from the whole set, add the
/// earliest streamed pattern within `t` of it (the most likely member of its
/// ball).
pub fn mcoc_design(model: &PositionErrorModel, t: usize, q: usize) -> Result<PatternSet> {
    Ok(mcoc_design_traced(model, t, q)?.set)
}

pub fn mcoc_design_traced(model: &PositionErrorModel, t: usize, q: usize) -> Result<McocOutcome> {
    let mut stream = ocp_stream(model);
    let mut seen: Vec<Pattern> = Vec::new();
    let mut chosen: Vec<Pattern> = Vec::with_capacity(q);
    while chosen.len() < q {
        let Some((rho, _)) = stream.next() else {
            return Err(Error::StreamExhausted { emitted: seen.len() });
        };
        seen.push(rho);
        let rho = seen.last().expect("just pushed");
        if chosen.iter().any(|r| r.within(rho, t)) {
            continue;
        }
        let rep = seen.iter().find(|v| v.within(rho, t)).expect("rho is within t of itself").clone();
        chosen.push(rep);
    }
    let examined = seen.len();
    let set = PatternSet::new(model.n(), chosen)?.with_comment(format!("design=mcoc t={t} q={q}"));
    Ok(McocOutcome { set, examined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverPlan;
    use crate::patterns::{ball_prob, pattern_prob};

    fn toy_model(n: usize, decay: f64) -> PositionErrorModel {
        PositionErrorModel::new((0..n).map(|i| 0.3 * decay.powi(i as i32)).collect()).unwrap()
    }

    fn all_patterns(n: usize) -> Vec<Pattern> {
        (0u32..1 << n)
            .map(|m| Pattern::from_bits(&(0..n).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>()))
            .collect()
    }

    fn union_prob(model: &PositionErrorModel, centers: &[Pattern], t: usize) -> f64 {
        all_patterns(model.n())
            .iter()
            .filter(|u| centers.iter().any(|c| c.within(u, t)))
            .map(|u| pattern_prob(model, u))
            .sum()
    }

    #[test]
    fn added_probability_cases() {
        let m = toy_model(10, 0.75);
        let cand = Pattern::new(vec![2, 5]).unwrap();
        assert!((added_prob(&m, 1, &[], &cand) - ball_prob(&m, &cand, 1)).abs() < 1e-15);
        assert_eq!(added_prob(&m, 1, std::slice::from_ref(&cand), &cand), 0.0);
        let current = vec![Pattern::zero(), Pattern::new(vec![1]).unwrap(), Pattern::new(vec![3, 4]).unwrap()];
        for cand in all_patterns(10).iter().step_by(7) {
            let mut with = current.clone();
            with.push(cand.clone());
            let expect = union_prob(&m, &with, 1) - union_prob(&m, &current, 1);
            assert!((added_prob(&m, 1, &current, cand) - expect).abs() < 1e-14, "{cand:?}");
        }
    }

    /// Greedy by brute force: argmax over the whole space each round, ties to
    /// the earlier candidate of the ball-ranked order.
    fn exhaustive_greedy(model: &PositionErrorModel, t: usize, q: usize) -> Vec<Pattern> {
        let order: Vec<Pattern> = ocp_ball_stream(model, t, 1 << model.n()).map(|x| x.0).collect();
        let mut chosen: Vec<Pattern> = Vec::new();
        for _ in 0..q {
            let mut best: Option<(usize, f64)> = None;
            for (i, c) in order.iter().enumerate() {
                if chosen.contains(c) {
                    continue;
                }
                let mut with = chosen.clone();
                with.push(c.clone());
                let gain = union_prob(model, &with, t) - union_prob(model, &chosen, t);
                if best.is_none_or(|(_, g)| gain > g + 1e-15) {
                    best = Some((i, gain));
                }
            }
            chosen.push(order[best.unwrap().0].clone());
        }
        chosen
    }

    #[test]
    fn greedy_matches_exhaustive_on_toy_models() {
        for (n, t, q, decay) in [(10, 1, 4, 0.75), (9, 1, 8, 0.8), (8, 2, 6, 0.7)] {
            let m = toy_model(n, decay);
            let lazy = greedy_design(&m, t, q, Some(1 << n)).unwrap();
            let scan = greedy_design_sequential(&m, t, q, Some(1 << n)).unwrap();
            let brute = exhaustive_greedy(&m, t, q);
            assert_eq!(lazy.patterns(), &brute[..], "n={n} t={t}");
            assert_eq!(scan.patterns(), &brute[..], "n={n} t={t}");
            assert_eq!(lazy.patterns()[0], Pattern::zero());
        }
    }

    #[test]
    fn greedy_gains_do_not_increase() {
        let m = toy_model(12, 0.8);
        let set = greedy_design(&m, 1, 10, None).unwrap();
        let plan = CoverPlan::new(set.patterns(), 12, 1, u64::MAX).unwrap();
        let inc = plan.increments(m.log_ratios(), m.ln_base());
        assert!(inc.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{inc:?}");
    }

    #[test]
    fn small_horizon_is_reported() {
        let m = toy_model(12, 0.9);
        assert!(matches!(greedy_design(&m, 1, 12, Some(13)), Err(Error::HorizonExhausted { .. })));
        assert_eq!(greedy_design(&m, 1, 1, None).unwrap().patterns(), &[Pattern::zero()]);
        // Without a horizon it grows until the bound holds.
        let full = greedy_design(&m, 2, 8, Some(1 << 12)).unwrap();
        assert_eq!(greedy_design(&m, 2, 8, None).unwrap().patterns(), full.patterns());
    }

    #[test]
    fn mcoc_covers_every_examined_pattern() {
        let m = toy_model(10, 0.75);
        let out = mcoc_design_traced(&m, 1, 8).unwrap();
        assert_eq!(out.set.len(), 8);
        assert_eq!(out.set.patterns()[0], Pattern::zero());
        for (rho, _) in ocp_stream(&m).take(out.examined) {
            assert!(out.set.iter().any(|r| r.within(&rho, 1)), "{rho:?} uncovered");
        }
        // Each addition is the most likely member of some uncovered ball, so
        // coverage grows with every pattern.
        let plan = CoverPlan::new(out.set.patterns(), 10, 1, u64::MAX).unwrap();
        assert!(plan.increments(m.log_ratios(), m.ln_base()).iter().all(|&x| x > 0.0));
    }

    #[test]
    fn mcoc_exhaustion_is_an_error() {
        let m = toy_model(3, 0.9);
        assert!(matches!(mcoc_design(&m, 1, 5), Err(Error::StreamExhausted { .. })));
    }
}
