use crate::error::{Error, Result};
use crate::patterns::Pattern;

/// One interleaving condition between the ordered error reliabilities
/// `beta_(i)` and the ordered correct reliabilities `gamma_(j)` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `beta_(i) <= gamma_(j)`
    BetaBelowGamma { i: usize, j: usize },
    /// `gamma_(j) <= beta_(i)`
    GammaBelowBeta { j: usize, i: usize },
}

/// Conditions on the order statistics that are equivalent to the error
/// vector agreeing with a pattern on its first `i_max` positions, given that
/// exactly `b` of the `n` hard decisions are wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintChain {
    pub n: usize,
    pub b: usize,
    pub conditions: Vec<Condition>,
    /// False when the pattern needs more correct positions in its prefix
    /// than exist (`i_max - w > n - b`); the event then has probability 0.
    pub feasible: bool,
}

impl ConstraintChain {
    /// The chain with no conditions (probability 1).
    pub fn unconstrained(n: usize, b: usize) -> Self {
        Self { n, b, conditions: Vec::new(), feasible: true }
    }

    /// Single condition `beta_(i) <= gamma_(j)`; vacuous when `j > n - b`.
    pub fn single(n: usize, b: usize, i: usize, j: usize) -> Self {
        let conditions = if j <= n - b { vec![Condition::BetaBelowGamma { i, j }] } else { Vec::new() };
        Self { n, b, conditions, feasible: true }
    }

    /// Constrained error indices `I_F`, ascending.
    pub fn beta_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .conditions
            .iter()
            .map(|c| match *c {
                Condition::BetaBelowGamma { i, .. } | Condition::GammaBelowBeta { i, .. } => i,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Constrained correct indices `J_F`, ascending.
    pub fn gamma_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .conditions
            .iter()
            .map(|c| match *c {
                Condition::BetaBelowGamma { j, .. } | Condition::GammaBelowBeta { j, .. } => j,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `d_F = |I_F| + |J_F|`.
    pub fn dimension(&self) -> usize {
        self.beta_indices().len() + self.gamma_indices().len()
    }

    /// Checks the chain against concrete ordered samples (index 0 holds the
    /// smallest value).
    pub fn satisfied_by(&self, beta: &[f64], gamma: &[f64]) -> bool {
        self.feasible
            && self.conditions.iter().all(|c| match *c {
                Condition::BetaBelowGamma { i, j } => beta[i - 1] <= gamma[j - 1],
                Condition::GammaBelowBeta { j, i } => gamma[j - 1] <= beta[i - 1],
            })
    }
}

/// Translates `e_[i_max] = rho_[i_max]` into order-statistic conditions.
///
/// Walking positions `1..=i_max`, set positions take the error order
/// statistics and unset positions the correct ones, each in increasing rank.
/// Every change of type between neighbours yields one inequality; the last
/// pattern error is then tied to the smallest correct reliability outside the
/// prefix. Same-type neighbours are ordered automatically and produce nothing.
pub fn build_constraint_chain(pattern: &Pattern, n: usize, b: usize) -> Result<ConstraintChain> {
    let w = pattern.hamming_weight();
    let i_max = pattern.i_max().ok_or(Error::ZeroPattern)?;
    if i_max > n {
        return Err(Error::InvalidPattern(format!("position {i_max} exceeds n={n}")));
    }
    if b < w || b > n {
        return Err(Error::InvalidIndex(format!("b={b} must lie in {w}..={n}")));
    }
    let n_correct = n - b;
    let mut conditions = Vec::new();
    let mut feasible = true;
    // (is_error, rank) of the previous position.
    let mut prev: Option<(bool, usize)> = None;
    let (mut beta_rank, mut gamma_rank) = (0usize, 0usize);
    let support = pattern.support();
    let mut next_set = 0;
    for pos in 1..=i_max {
        let is_error = next_set < support.len() && support[next_set] == pos;
        let cur = if is_error {
            next_set += 1;
            beta_rank += 1;
            (true, beta_rank)
        } else {
            gamma_rank += 1;
            if gamma_rank > n_correct {
                feasible = false;
            }
            (false, gamma_rank)
        };
        if let Some((prev_err, prev_rank)) = prev {
            match (prev_err, cur.0) {
                (true, false) => conditions.push(Condition::BetaBelowGamma { i: prev_rank, j: cur.1 }),
                (false, true) => conditions.push(Condition::GammaBelowBeta { j: prev_rank, i: cur.1 }),
                _ => {}
            }
        }
        prev = Some(cur);
    }
    let closing = i_max - w + 1;
    if closing <= n_correct {
        conditions.push(Condition::BetaBelowGamma { i: w, j: closing });
    }
    if !feasible {
        conditions.clear();
    }
    Ok(ConstraintChain { n, b, conditions, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_example_chain() {
        let rho = Pattern::from_bits(&[1, 1, 0, 1, 0, 0, 0]);
        let chain = build_constraint_chain(&rho, 7, 5).unwrap();
        assert_eq!(
            chain.conditions,
            vec![
                Condition::BetaBelowGamma { i: 2, j: 1 },
                Condition::GammaBelowBeta { j: 1, i: 3 },
                Condition::BetaBelowGamma { i: 3, j: 2 },
            ]
        );
        assert_eq!(chain.beta_indices(), vec![2, 3]);
        assert_eq!(chain.gamma_indices(), vec![1, 2]);
        assert_eq!(chain.dimension(), 4);
        assert!(chain.feasible);
    }

    #[test]
    fn single_leading_error() {
        let chain = build_constraint_chain(&Pattern::new(vec![1]).unwrap(), 31, 2).unwrap();
        assert_eq!(chain.conditions, vec![Condition::BetaBelowGamma { i: 1, j: 1 }]);
    }

    #[test]
    fn contiguous_block() {
        let chain = build_constraint_chain(&Pattern::new(vec![1, 2, 3, 4]).unwrap(), 20, 5).unwrap();
        assert_eq!(chain.conditions, vec![Condition::BetaBelowGamma { i: 4, j: 1 }]);
    }

    #[test]
    fn infeasible_and_vacuous_closing() {
        // n - b = 2 correct positions, but the prefix needs three.
        let rho = Pattern::new(vec![4]).unwrap();
        let chain = build_constraint_chain(&rho, 5, 3).unwrap();
        assert!(!chain.feasible);
        // Exactly n - b correct positions in the prefix: closing condition vanishes.
        let rho = Pattern::new(vec![3]).unwrap();
        let chain = build_constraint_chain(&rho, 5, 3).unwrap();
        assert!(chain.feasible);
        assert_eq!(chain.conditions, vec![Condition::GammaBelowBeta { j: 2, i: 1 }]);
    }

    #[test]
    fn zero_pattern_rejected() {
        assert_eq!(build_constraint_chain(&Pattern::zero(), 7, 1), Err(Error::ZeroPattern));
    }

    #[test]
    fn chain_matches_prefix_event_on_samples() {
        // Joint sort of concrete values reproduces the chain verdict.
        let rho = Pattern::from_bits(&[0, 1, 1, 0, 1]);
        let chain = build_constraint_chain(&rho, 8, 4).unwrap();
        let beta = [0.3, 0.35, 0.6, 2.0];
        let gamma = [0.1, 0.5, 0.9, 1.1];
        // Sorted: g.1 b.3 b.35 g.5 b.6 g.9 ... -> prefix 0,1,1,0,1 and next is gamma.
        assert!(chain.satisfied_by(&beta, &gamma));
        let gamma_bad = [0.1, 0.5, 0.55, 1.1];
        assert!(!chain.satisfied_by(&beta, &gamma_bad));
    }
}
