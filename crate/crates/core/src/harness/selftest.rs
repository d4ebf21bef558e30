//! Brute-force oracle checks runnable from the command line.

use std::collections::HashSet;

use rand::Rng;

use crate::channel::{llr, sort_by_reliability, transmit};
use crate::codes::{Code, Word};
use crate::decoder::{chase_decode, covered_space_prob};
use crate::design::{greedy_design, greedy_design_sequential};
use crate::patterns::{
    ball_prob, gen_chase, gen_lw, gen_restricted, ocp_stream, pattern_prob, Pattern, PatternSet, PositionErrorModel,
};
use crate::stats::shard_rng;

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: usize, total: usize) -> Check {
    Check { name, passed: failures == 0, detail: format!("{failures} mismatches in {total} cases") }
}

fn all_vectors(n: usize) -> Vec<Pattern> {
    (0u32..1 << n)
        .map(|m| Pattern::from_bits(&(0..n).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>()))
        .collect()
}

/// Sorted-position flip set that turns the hard decision into `word`.
fn flips_to(word: &Word, hd: &[u8], permutation: &[usize]) -> Pattern {
    Pattern::new((1..=hd.len()).filter(|&s| word.get(permutation[s - 1]) != hd[s - 1]).collect())
        .expect("ascending positions")
}

/// Covered-space probability and list contents on the (7,4) code against
/// exhaustive enumeration of all 128 vectors.
pub fn hamming_oracle(realizations: usize, seed: u64) -> Vec<Check> {
    let code = Code::bch(3, 1, false).expect("(7,4) code");
    let book = code.codebook().expect("small code");
    let all = all_vectors(7);
    let sets = [gen_chase(3).with_length(7).unwrap(), gen_lw(7, 19), gen_restricted(5, 2).with_length(7).unwrap()];
    let mut rng = shard_rng(seed, 7, 0);
    let (mut cov_bad, mut list_bad, mut cases) = (0, 0, 0);
    for r in 0..realizations {
        let c = &book[rng.random_range(0..book.len())];
        let sigma = 0.5 + 0.5 * (r % 4) as f64;
        let l = llr(&transmit(c, sigma, &mut rng), sigma);
        let sorted = sort_by_reliability(&l);
        for set in &sets {
            cases += 1;
            let covered: Vec<&Pattern> = all.iter().filter(|u| set.iter().any(|rho| rho.within(u, 1))).collect();
            let brute: f64 = covered
                .iter()
                .map(|u| {
                    u.to_bits(7)
                        .iter()
                        .zip(&sorted.alpha)
                        .map(|(&b, &a)| if b == 1 { 1.0 / (1.0 + a.exp()) } else { 1.0 / (1.0 + (-a).exp()) })
                        .product::<f64>()
                })
                .sum();
            let got = covered_space_prob(1, set, &l).expect("small set");
            if (got - brute).abs() > 1e-12 {
                cov_bad += 1;
            }
            let covered: HashSet<&Pattern> = covered.into_iter().collect();
            let expect: HashSet<Vec<u8>> = book
                .iter()
                .filter(|w| covered.contains(&flips_to(w, &sorted.hard_decision_sorted, &sorted.permutation)))
                .map(|w| w.bits().to_vec())
                .collect();
            let (_, list) = chase_decode(&code, &l, set).expect("lengths match");
            let got: HashSet<Vec<u8>> = list.entries().iter().map(|(w, _)| w.bits().to_vec()).collect();
            if got != expect || got.len() != list.len() {
                list_bad += 1;
            }
        }
    }
    vec![
        check("covered-space probability vs enumeration on (7,4)", cov_bad, cases),
        check("candidate list vs covered codewords on (7,4)", list_bad, cases),
    ]
}

/// Generator sizes and the 19-pattern logistic-weight example.
pub fn generator_counts() -> Vec<Check> {
    let toy: Vec<Vec<usize>> = vec![
        vec![], vec![1], vec![2], vec![3], vec![1, 2], vec![4], vec![1, 3], vec![5], vec![1, 4], vec![2, 3],
        vec![6], vec![1, 5], vec![2, 4], vec![1, 2, 3], vec![7], vec![1, 6], vec![2, 5], vec![3, 4], vec![1, 2, 4],
    ];
    let toy = PatternSet::new(7, toy.into_iter().map(|s| Pattern::new(s).unwrap()).collect()).unwrap();
    let counts = [(gen_restricted(6, 3).len(), 42), (gen_restricted(8, 3).len(), 93), (gen_chase(4).len(), 16)];
    vec![
        check("restricted and Chase set sizes", counts.iter().filter(|(a, b)| a != b).count(), counts.len()),
        check("logistic-weight set for n=7, q=19", !gen_lw(7, 19).same_members(&toy) as usize, 1),
    ]
}

/// Sub-pattern closure and the newly covered set of the last pattern for
/// logistic-weight sets, by enumeration of the whole space.
pub fn lw_structure(max_n: usize) -> Vec<Check> {
    let (mut closure_bad, mut fresh_bad, mut cases) = (0, 0, 0);
    for n in 4..=max_n {
        let all = all_vectors(n);
        for t in 1..=2 {
            for q in [5, 10, 19, 40] {
                if q > 1 << n {
                    continue;
                }
                cases += 1;
                let set = gen_lw(n, q);
                if !set.is_subpattern_closed() {
                    closure_bad += 1;
                }
                let (last, earlier) = set.patterns().split_last().expect("q >= 1");
                let fresh: HashSet<&Pattern> = all
                    .iter()
                    .filter(|u| last.within(u, t) && !earlier.iter().any(|r| r.within(u, t)))
                    .collect();
                let i_max = last.i_max().unwrap_or(0);
                let predicted: HashSet<Pattern> = all
                    .iter()
                    .filter(|k| k.hamming_weight() == t && k.support()[0] > i_max)
                    .map(|k| last.xor(k))
                    .collect();
                if fresh.len() != predicted.len() || !predicted.iter().all(|p| fresh.contains(p)) {
                    fresh_bad += 1;
                }
            }
        }
    }
    vec![
        check("logistic-weight sets closed under sub-patterns", closure_bad, cases),
        check("newly covered set of the last logistic-weight pattern", fresh_bad, cases),
    ]
}

/// Candidate stream order, ball probabilities and greedy pruning on a toy
/// model against full enumeration.
pub fn design_oracles() -> Vec<Check> {
    let n = 10;
    let model = PositionErrorModel::new((0..n).map(|i| 0.3 * 0.75f64.powi(i)).collect()).unwrap();
    let all = all_vectors(n as usize);
    let emitted: Vec<f64> = ocp_stream(&model).map(|x| x.1).collect();
    let mut sorted: Vec<f64> = all.iter().map(|u| pattern_prob(&model, u)).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let order_bad = emitted.iter().zip(&sorted).filter(|(a, b)| (*a - *b).abs() > 1e-12 * *b).count()
        + (emitted.len() != sorted.len()) as usize;
    let ball_bad = all
        .iter()
        .step_by(37)
        .filter(|rho| {
            let direct: f64 = all.iter().filter(|u| rho.within(u, 2)).map(|u| pattern_prob(&model, u)).sum();
            (direct - ball_prob(&model, rho, 2)).abs() > 1e-13
        })
        .count();
    let lazy = greedy_design(&model, 1, 8, Some(1 << n)).expect("full horizon");
    let scan = greedy_design_sequential(&model, 1, 8, Some(1 << n)).expect("full horizon");
    vec![
        check("candidate stream order vs sorted enumeration", order_bad, all.len()),
        check("ball probability vs enumeration", ball_bad, all.len().div_ceil(37)),
        check("lazy greedy vs sequential scan", (lazy.patterns() != scan.patterns()) as usize, 1),
    ]
}

/// All checks, in order.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = hamming_oracle(300, seed);
    out.extend(generator_counts());
    out.extend(lw_structure(8));
    out.extend(design_oracles());
    out
}
