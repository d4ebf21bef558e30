use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{ball_prob, Pattern, PositionErrorModel};

#[derive(Debug, Clone)]
struct State {
    cost: f64,
    support: Vec<usize>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.support.len().cmp(&other.support.len()))
            .then_with(|| self.support.cmp(&other.support))
    }
}

/// Lazy enumeration of all of `F_2^n` in non-increasing `P(e = rho)` under a
/// position model.
///
/// Since `-ln P(e = rho) = const + sum_{i in rho} w_i` with `w` sorted
/// ascending, a best-first search over supports works: each support with
/// last index `l < n` has two successors, "append `l + 1`" and "replace `l`
/// by `l + 1`", neither cheaper than its parent, and every support is
/// reached from exactly one parent. Ties go to fewer positions, then the
/// lexicographically smaller support.
#[derive(Debug, Clone)]
pub struct OcpStream<'a> {
    model: &'a PositionErrorModel,
    heap: BinaryHeap<Reverse<State>>,
    started: bool,
    emitted: usize,
}

pub fn ocp_stream(model: &PositionErrorModel) -> OcpStream<'_> {
    OcpStream { model, heap: BinaryHeap::new(), started: false, emitted: 0 }
}

impl OcpStream<'_> {
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    fn push(&mut self, support: Vec<usize>) {
        let w = self.model.log_ratios();
        let cost = support.iter().map(|&i| w[i - 1]).sum();
        self.heap.push(Reverse(State { cost, support }));
    }
}

impl Iterator for OcpStream<'_> {
    type Item = (Pattern, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.model.n();
        if !self.started {
            self.started = true;
            if n > 0 {
                self.push(vec![1]);
            }
            self.emitted += 1;
            return Some((Pattern::zero(), self.model.ln_base().exp()));
        }
        let Reverse(state) = self.heap.pop()?;
        let last = *state.support.last().expect("non-empty support");
        if last < n {
            let mut extended = state.support.clone();
            extended.push(last + 1);
            self.push(extended);
            let mut replaced = state.support.clone();
            *replaced.last_mut().expect("non-empty") = last + 1;
            self.push(replaced);
        }
        self.emitted += 1;
        let prob = (self.model.ln_base() - state.cost).exp();
        Some((Pattern::from_sorted_unchecked(state.support), prob))
    }
}

/// The first `horizon` patterns of [`ocp_stream`], re-ranked by the
/// probability of their radius-`t` ball (stable, so equal scores keep stream
/// order). Ball probability is not a sum over positions, so the ranking is
/// exact only within the horizon.
#[derive(Debug, Clone)]
pub struct OcpBallStream {
    items: Vec<(Pattern, f64)>,
    pos: usize,
    complete: bool,
}

pub fn ocp_ball_stream(model: &PositionErrorModel, t: usize, horizon: usize) -> OcpBallStream {
    let mut items: Vec<(Pattern, f64)> =
        ocp_stream(model).take(horizon).map(|(p, _)| { let b = ball_prob(model, &p, t); (p, b) }).collect();
    let complete = model.n() < usize::BITS as usize && items.len() == 1usize << model.n();
    items.sort_by(|a, b| b.1.total_cmp(&a.1));
    OcpBallStream { items, pos: 0, complete }
}

impl OcpBallStream {
    /// All candidates in ranked order.
    pub fn candidates(&self) -> &[(Pattern, f64)] {
        &self.items
    }

    /// Whether the horizon spans the whole space.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Smallest ball probability within the horizon.
    pub fn floor(&self) -> f64 {
        self.items.last().map_or(0.0, |x| x.1)
    }
}

impl Iterator for OcpBallStream {
    type Item = (Pattern, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let item = self.items.get(self.pos)?.clone();
        self.pos += 1;
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::pattern_prob;
    use std::collections::HashSet;

    fn toy_model(n: usize) -> PositionErrorModel {
        let p: Vec<f64> = (0..n).map(|i| 0.35 * (0.8f64).powi(i as i32)).collect();
        PositionErrorModel::new(p).unwrap()
    }

    fn all_patterns(n: usize) -> Vec<Pattern> {
        (0u32..1 << n)
            .map(|m| Pattern::from_bits(&(0..n).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn starts_with_zero_then_least_reliable() {
        let m = toy_model(8);
        let mut s = ocp_stream(&m);
        assert_eq!(s.next().unwrap().0, Pattern::zero());
        assert_eq!(s.next().unwrap().0, Pattern::new(vec![1]).unwrap());
    }

    #[test]
    fn enumerates_space_in_order() {
        let n = 10;
        let m = toy_model(n);
        let out: Vec<(Pattern, f64)> = ocp_stream(&m).collect();
        assert_eq!(out.len(), 1 << n);
        let distinct: HashSet<&Pattern> = out.iter().map(|x| &x.0).collect();
        assert_eq!(distinct.len(), 1 << n);
        assert!(out.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12)));
        let mut sorted: Vec<f64> = all_patterns(n).iter().map(|p| pattern_prob(&m, p)).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in out.iter().zip(&sorted) {
            assert!((a.1 - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn ties_prefer_lower_weight_then_lexicographic() {
        // Equal log-ratios make all same-weight patterns tie.
        let m = PositionErrorModel::new(vec![0.2; 4]).unwrap();
        let order: Vec<Vec<usize>> = ocp_stream(&m).map(|(p, _)| p.support().to_vec()).collect();
        assert_eq!(&order[..6], &[vec![], vec![1], vec![2], vec![3], vec![4], vec![1, 2]]);
    }

    #[test]
    fn ball_stream_matches_brute_force() {
        let n = 10;
        let m = toy_model(n);
        let bs = ocp_ball_stream(&m, 1, 1024);
        assert!(bs.is_complete());
        let got: Vec<f64> = bs.clone().map(|x| x.1).collect();
        let mut want: Vec<f64> = all_patterns(n).iter().map(|p| ball_prob(&m, p, 1)).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        assert_eq!(bs.candidates()[0].0, Pattern::zero());
        let t0: Vec<Pattern> = ocp_ball_stream(&m, 0, 50).map(|x| x.0).collect();
        let plain: Vec<Pattern> = ocp_stream(&m).take(50).map(|x| x.0).collect();
        assert_eq!(t0, plain);
    }

    #[test]
    fn zero_pattern_leads_every_ball_stream() {
        for n in [6, 9, 12] {
            let m = toy_model(n);
            for t in 1..=2 {
                let bs = ocp_ball_stream(&m, t, 1 << n);
                let best = bs.candidates()[0].1;
                let zero = ball_prob(&m, &Pattern::zero(), t);
                assert_eq!(bs.candidates()[0].0, Pattern::zero(), "n={n} t={t}");
                assert!(zero >= best);
            }
        }
    }
}
