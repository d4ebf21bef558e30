//! Chase-like list decoding and the covered-space probability of a
//! realization.
//!
//! For extended codes the covered space is the union of full-length radius-`t`
//! balls around the test words, which matches the decoder: a BDD result is
//! only accepted within distance `t` of its test word over all `n` positions.

use std::collections::HashSet;

use crate::channel::{hard_decision, sort_by_reliability, SortedReceived};
use crate::codes::{Code, Word};
use crate::coverage::{realization_measure, CoverPlan, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::patterns::PatternSet;

/// Distinct codewords found by the decoder with their correlation metrics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateList {
    entries: Vec<(Word, f64)>,
    best: Option<usize>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Word, f64)] {
        &self.entries
    }

    pub fn contains(&self, word: &Word) -> bool {
        self.entries.iter().any(|(w, _)| w == word)
    }

    /// Metric-maximizing entry; the first one found wins ties.
    pub fn best(&self) -> Option<&(Word, f64)> {
        self.best.map(|i| &self.entries[i])
    }

    fn push(&mut self, word: Word, metric: f64) {
        match self.best {
            Some(b) if self.entries[b].1 >= metric => {}
            _ => self.best = Some(self.entries.len()),
        }
        self.entries.push((word, metric));
    }
}

/// Runs the Chase-like decoder: one BDD attempt per test word
/// `hard decision + pattern` (pattern positions mapped through the
/// reliability order), collecting the distinct successes. Returns the
/// best-correlating candidate, or `None` when every attempt fails.
pub fn chase_decode(code: &Code, llr: &[f64], set: &PatternSet) -> Result<(Option<Word>, CandidateList)> {
    let sorted = sort_by_reliability(llr);
    chase_decode_sorted(code, llr, &sorted, set)
}

pub(crate) fn chase_decode_sorted(
    code: &Code,
    llr: &[f64],
    sorted: &SortedReceived,
    set: &PatternSet,
) -> Result<(Option<Word>, CandidateList)> {
    let n = code.n();
    if llr.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: llr.len() });
    }
    if set.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: set.n() });
    }
    let hd = hard_decision(llr);
    let n_core = code.n_core();
    let base_syn = code.syndromes(&hd);
    let base_core_parity = hd.bits()[..n_core].iter().fold(0u8, |a, &b| a ^ b);
    let base_parity_bit = if code.is_extended() { hd.get(n_core) } else { 0 };
    let total_reliability: f64 = llr.iter().map(|l| l.abs()).sum();

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut list = CandidateList::default();
    let mut syn = base_syn.clone();
    let mut flips: Vec<usize> = Vec::new();
    for pattern in set.iter() {
        syn.copy_from_slice(&base_syn);
        let mut core_parity = base_core_parity;
        let mut parity_bit = base_parity_bit;
        flips.clear();
        for &s in pattern.support() {
            let pos = sorted.permutation[s - 1];
            flips.push(pos);
            if pos < n_core {
                code.add_syndrome_column(&mut syn, pos);
                core_parity ^= 1;
            } else {
                parity_bit ^= 1;
            }
        }
        let Some(corr) = code.bdd_from_syndromes(&syn, core_parity, parity_bit) else {
            continue;
        };
        // Flip set of the decoded word relative to the hard decision.
        let mut diff = flips.clone();
        diff.extend_from_slice(&corr.core_errors);
        if corr.parity_flip {
            diff.push(n_core);
        }
        diff.sort_unstable();
        let mut key = Vec::with_capacity(diff.len());
        for d in diff {
            if key.last() == Some(&d) {
                key.pop();
            } else {
                key.push(d);
            }
        }
        if seen.contains(&key) {
            continue;
        }
        let metric = total_reliability - 2.0 * key.iter().map(|&i| llr[i].abs()).sum::<f64>();
        let mut word = hd.clone();
        for &i in &key {
            word.flip(i);
        }
        seen.insert(key);
        list.push(word, metric);
    }
    let decoded = list.best().map(|(w, _)| w.clone());
    Ok((decoded, list))
}

/// Whether the transmitted codeword is among the decoder's candidates.
pub fn list_contains(code: &Code, llr: &[f64], set: &PatternSet, transmitted: &Word) -> Result<bool> {
    debug_assert!(code.is_codeword(transmitted), "transmitted word is not a codeword");
    Ok(chase_decode(code, llr, set)?.1.contains(transmitted))
}

/// Covered-space evaluator for a fixed pattern set, reusable across
/// realizations.
#[derive(Debug, Clone)]
pub struct CoveredSpace {
    plan: CoverPlan,
}

impl CoveredSpace {
    pub fn new(set: &PatternSet, t: usize) -> Result<Self> {
        Self::with_budget(set, t, DEFAULT_BUDGET)
    }

    pub fn with_budget(set: &PatternSet, t: usize, budget: u64) -> Result<Self> {
        Ok(Self { plan: CoverPlan::new(set.patterns(), set.n(), t, budget)? })
    }

    /// `P_cov(y)`: posterior probability of the union of radius-`t` balls
    /// around the test words.
    pub fn prob(&self, llr: &[f64]) -> Result<f64> {
        if llr.len() != self.plan.n() {
            return Err(Error::LengthMismatch { expected: self.plan.n(), actual: llr.len() });
        }
        let sorted = sort_by_reliability(llr);
        Ok(self.prob_sorted(&sorted))
    }

    pub(crate) fn prob_sorted(&self, sorted: &SortedReceived) -> f64 {
        let (costs, ln_base) = realization_measure(&sorted.alpha);
        self.plan.mass(&costs, ln_base)
    }
}

/// `P_cov(y)` for one realization; see [`CoveredSpace`] to reuse the plan.
pub fn covered_space_prob(t: usize, set: &PatternSet, llr: &[f64]) -> Result<f64> {
    CoveredSpace::new(set, t)?.prob(llr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{llr as to_llr, transmit};
    use crate::patterns::{gen_chase, gen_lw, Pattern};
    use crate::stats::shard_rng;
    use rand::Rng;

    fn hamming74() -> Code {
        Code::bch(3, 1, false).unwrap()
    }

    #[test]
    fn noiseless_decoding_returns_transmitted() {
        let code = Code::bch(4, 2, true).unwrap();
        let c = code.encode(&[1, 0, 1, 1, 0, 0, 1]).unwrap();
        let llr: Vec<f64> = c.bits().iter().map(|&b| if b == 0 { 5.0 } else { -5.0 }).collect();
        let set = gen_lw(16, 10).with_length(16).unwrap();
        let (dec, list) = chase_decode(&code, &llr, &set).unwrap();
        assert_eq!(dec.as_ref(), Some(&c));
        assert!(list.contains(&c));
        assert!(list_contains(&code, &llr, &set, &c).unwrap());
    }

    #[test]
    fn zero_pattern_only_is_plain_bdd() {
        let code = hamming74();
        let set = PatternSet::new(7, vec![Pattern::zero()]).unwrap();
        let mut rng = shard_rng(8, 0, 0);
        for _ in 0..500 {
            let llr: Vec<f64> = (0..7).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let (dec, _) = chase_decode(&code, &llr, &set).unwrap();
            assert_eq!(dec, code.bdd_decode(&hard_decision(&llr)).unwrap());
        }
    }

    #[test]
    fn list_metrics_and_order_invariance() {
        let code = Code::bch(4, 1, false).unwrap();
        let set = gen_chase(4).with_length(15).unwrap();
        let mut reversed: Vec<Pattern> = set.patterns().to_vec();
        reversed.reverse();
        let reversed = PatternSet::new(15, reversed).unwrap();
        let mut rng = shard_rng(9, 0, 0);
        for _ in 0..300 {
            let c = code.encode(&(0..code.k()).map(|_| rng.random::<bool>() as u8).collect::<Vec<_>>()).unwrap();
            let llr = to_llr(&transmit(&c, 0.7, &mut rng), 0.7);
            let (dec, list) = chase_decode(&code, &llr, &set).unwrap();
            for (w, m) in list.entries() {
                assert!(code.is_codeword(w));
                assert!((w.correlation(&llr) - m).abs() < 1e-9);
                assert!(list.best().unwrap().1 >= *m);
            }
            let (dec2, list2) = chase_decode(&code, &llr, &reversed).unwrap();
            assert_eq!(list.len(), list2.len());
            assert!(list.entries().iter().all(|(w, _)| list2.contains(w)));
            if let (Some(a), Some(b)) = (&dec, &dec2) {
                assert!((a.correlation(&llr) - b.correlation(&llr)).abs() < 1e-12);
            } else {
                assert_eq!(dec, dec2);
            }
        }
    }

    #[test]
    fn single_ball_closed_form() {
        // Only the zero pattern: the ball around the hard decision.
        let set = PatternSet::new(7, vec![Pattern::zero()]).unwrap();
        let llr = [0.3, -1.2, 2.0, 0.1, -0.7, 3.0, 1.1];
        let got = covered_space_prob(1, &set, &llr).unwrap();
        let keep: Vec<f64> = llr.iter().map(|l: &f64| 1.0 / (1.0 + (-l.abs()).exp())).collect();
        let base: f64 = keep.iter().product();
        let expect = base * (1.0 + keep.iter().map(|k| (1.0 - k) / k).sum::<f64>());
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn covered_space_grows_with_patterns() {
        let llr = [0.3, -1.2, 2.0, 0.1, -0.7, 3.0, 1.1, -0.2, 0.5, 1.7];
        let mut last = 0.0;
        for q in 1..=30 {
            let p = covered_space_prob(1, &gen_lw(10, q), &llr).unwrap();
            assert!(p >= last - 1e-15);
            last = p;
        }
    }

    #[test]
    fn extended_list_matches_full_length_balls() {
        // On an extended code, c is in the list exactly when some test word
        // lies within t of c over all n positions.
        let code = Code::bch(4, 1, true).unwrap();
        let set = gen_lw(16, 12).with_length(16).unwrap();
        let mut rng = shard_rng(10, 0, 0);
        for _ in 0..2000 {
            let c = code.encode(&(0..code.k()).map(|_| rng.random::<bool>() as u8).collect::<Vec<_>>()).unwrap();
            let llr = to_llr(&transmit(&c, 0.8, &mut rng), 0.8);
            let sorted = sort_by_reliability(&llr);
            let hd = hard_decision(&llr);
            let err_sorted: Vec<usize> =
                (1..=16).filter(|&s| hd.get(sorted.permutation[s - 1]) != c.get(sorted.permutation[s - 1])).collect();
            let e = Pattern::new(err_sorted).unwrap();
            let covered = set.iter().any(|rho| rho.within(&e, 1));
            assert_eq!(list_contains(&code, &llr, &set, &c).unwrap(), covered);
        }
    }
}
