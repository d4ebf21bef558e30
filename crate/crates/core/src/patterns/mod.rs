//! Test patterns over reliability-sorted positions (position 1 is the least
//! reliable), the standard pattern-set generators, the per-position error
//! model used for design, and ordered candidate streams.

mod model;
mod ocp;

pub use model::{
    ball_prob, pattern_prob, position_error_probs, position_error_probs_integral,
    position_error_probs_mc, ModelMethod, PositionErrorModel,
};
pub use ocp::{ocp_ball_stream, ocp_stream, OcpBallStream, OcpStream};

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A sparse binary vector given by its ascending 1-based support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    support: Vec<usize>,
}

impl Pattern {
    pub fn zero() -> Self {
        Pattern { support: Vec::new() }
    }

    /// Validates a strictly ascending, 1-based support.
    pub fn new(support: Vec<usize>) -> Result<Self> {
        if support.first() == Some(&0) {
            return Err(Error::InvalidPattern("positions are 1-based".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPattern(format!("support {support:?} not strictly ascending")));
        }
        Ok(Pattern { support })
    }

    /// Builds a pattern from any collection of distinct positions.
    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Result<Self> {
        let mut support: Vec<usize> = positions.into_iter().collect();
        support.sort_unstable();
        Self::new(support)
    }

    pub(crate) fn from_sorted_unchecked(support: Vec<usize>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        Pattern { support }
    }

    /// Builds a pattern from a 0/1 vector over positions `1..=bits.len()`.
    pub fn from_bits(bits: &[u8]) -> Self {
        Pattern { support: bits.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i + 1).collect() }
    }

    pub fn to_bits(&self, n: usize) -> Vec<u8> {
        let mut bits = vec![0u8; n];
        for &i in &self.support {
            bits[i - 1] = 1;
        }
        bits
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn hamming_weight(&self) -> usize {
        self.support.len()
    }

    /// `sum_i i u_i`.
    pub fn logistic_weight(&self) -> usize {
        self.support.iter().sum()
    }

    /// Largest set position.
    pub fn i_max(&self) -> Option<usize> {
        self.support.last().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// Hamming distance.
    pub fn distance(&self, other: &Pattern) -> usize {
        sym_diff_len(&self.support, &other.support, usize::MAX)
    }

    /// `distance(other) <= t`, stopping early once the bound is exceeded.
    pub fn within(&self, other: &Pattern, t: usize) -> bool {
        sym_diff_len(&self.support, &other.support, t) <= t
    }

    pub fn xor(&self, other: &Pattern) -> Pattern {
        Pattern { support: sym_diff(&self.support, &other.support) }
    }

    /// Every nonempty proper-or-equal sub-support.
    pub fn nonzero_subpatterns(&self) -> Vec<Pattern> {
        let w = self.support.len();
        (1u64..1 << w)
            .map(|mask| Pattern {
                support: (0..w).filter(|&j| mask >> j & 1 == 1).map(|j| self.support[j]).collect(),
            })
            .collect()
    }

    /// Tie-break of logistic-weight ordering: compares binary representations
    /// with position 1 as the most significant bit.
    pub fn cmp_binary_msb_first(&self, other: &Pattern) -> Ordering {
        let d = sym_diff(&self.support, &other.support);
        match d.first() {
            None => Ordering::Equal,
            Some(&i) if self.contains(i) => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// Ordering by (logistic weight, Hamming weight, binary representation).
    pub fn cmp_logistic(&self, other: &Pattern) -> Ordering {
        self.logistic_weight()
            .cmp(&other.logistic_weight())
            .then(self.hamming_weight().cmp(&other.hamming_weight()))
            .then_with(|| self.cmp_binary_msb_first(other))
    }
}

/// Size of the symmetric difference of two ascending lists, saturating once it
/// exceeds `cap`.
pub(crate) fn sym_diff_len(a: &[usize], b: &[usize], cap: usize) -> usize {
    let (mut i, mut j, mut d) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                d += 1;
                i += 1;
            }
            Ordering::Greater => {
                d += 1;
                j += 1;
            }
        }
        if d > cap {
            return d;
        }
    }
    d + (a.len() - i) + (b.len() - j)
}

pub(crate) fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// An ordered collection of distinct patterns of ambient length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    n: usize,
    patterns: Vec<Pattern>,
    members: HashSet<Pattern>,
    /// Free-form provenance lines, written as `# ...` before the header.
    comments: Vec<String>,
}

impl PatternSet {
    pub fn empty(n: usize) -> Self {
        PatternSet { n, patterns: Vec::new(), members: HashSet::new(), comments: Vec::new() }
    }

    pub fn new(n: usize, patterns: Vec<Pattern>) -> Result<Self> {
        let mut set = Self::empty(n);
        for p in patterns {
            set.push(p)?;
        }
        Ok(set)
    }

    /// Appends a pattern, rejecting duplicates and out-of-range positions.
    pub fn push(&mut self, pattern: Pattern) -> Result<()> {
        if let Some(i) = pattern.i_max() {
            if i > self.n {
                return Err(Error::InvalidPattern(format!("position {i} exceeds n={}", self.n)));
            }
        }
        if !self.members.insert(pattern.clone()) {
            return Err(Error::InvalidPattern(format!("duplicate pattern {:?}", pattern.support())));
        }
        self.patterns.push(pattern);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pattern> {
        self.patterns.iter()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.members.contains(p)
    }

    pub fn max_weight(&self) -> usize {
        self.patterns.iter().map(Pattern::hamming_weight).max().unwrap_or(0)
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn with_comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    /// Same patterns with a different ambient length (e.g. to fit a code).
    pub fn with_length(&self, n: usize) -> Result<Self> {
        let mut set = PatternSet::new(n, self.patterns.clone())?;
        set.comments = self.comments.clone();
        Ok(set)
    }

    /// Whether both sets hold the same patterns irrespective of order.
    pub fn same_members(&self, other: &PatternSet) -> bool {
        self.n == other.n && self.members == other.members
    }

    /// First `q` patterns.
    pub fn prefix(&self, q: usize) -> PatternSet {
        PatternSet::new(self.n, self.patterns[..q.min(self.len())].to_vec()).expect("prefix of a valid set")
    }

    /// Every nonzero sub-pattern of every member is a member.
    pub fn is_subpattern_closed(&self) -> bool {
        self.patterns.iter().all(|p| p.nonzero_subpatterns().iter().all(|s| self.contains(s)))
    }

    /// Moving any set position one step towards a free less reliable
    /// position yields a member.
    pub fn is_left_shift_closed(&self) -> bool {
        self.patterns.iter().all(|p| {
            let s = p.support();
            s.iter().enumerate().all(|(k, &i)| {
                let free = i > 1 && (k == 0 || s[k - 1] != i - 1);
                if !free {
                    return true;
                }
                let mut shifted = s.to_vec();
                shifted[k] = i - 1;
                self.contains(&Pattern::from_sorted_unchecked(shifted))
            })
        })
    }

    /// Text form: optional `# ` comment lines, a `n=<n> q=<q>` header, then one
    /// line per pattern with its ascending support separated by spaces (an
    /// empty line is the zero pattern).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "n={} q={}", self.n, self.len());
        for p in &self.patterns {
            let line: Vec<String> = p.support().iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut comments = Vec::new();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    comments.push(l.strip_prefix("# ").unwrap_or(&l[1..]).to_string());
                }
                Some(l) => break l,
                None => return Err(Error::Parse("missing header line".into())),
            }
        };
        let (n, q) = parse_header(header)?;
        let mut set = PatternSet::empty(n);
        set.comments = comments;
        for (lineno, line) in lines.enumerate() {
            if set.len() == q {
                return Err(Error::Parse(format!("more than q={q} pattern lines")));
            }
            let support = line
                .split_whitespace()
                .map(|tok| tok.parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2))))
                .collect::<Result<Vec<_>>>()?;
            set.push(Pattern::new(support)?)?;
        }
        if set.len() != q {
            return Err(Error::Parse(format!("header announces q={q}, found {}", set.len())));
        }
        Ok(set)
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut n = None;
    let mut q = None;
    for tok in line.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        let val: usize = val.parse().map_err(|e| Error::Parse(format!("header {key}: {e}")))?;
        match key {
            "n" => n = Some(val),
            "q" => q = Some(val),
            _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
        }
    }
    match (n, q) {
        (Some(n), Some(q)) => Ok((n, q)),
        _ => Err(Error::Parse(format!("header {line:?} must be `n=<n> q=<q>`"))),
    }
}

/// All `k`-subsets of `1..=p` in lexicographic order.
pub(crate) fn combinations(p: usize, k: usize) -> Vec<Vec<usize>> {
    if k > p {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        // Rightmost index that can still advance.
        let Some(i) = (0..k).rev().find(|&i| cur[i] < p - (k - 1 - i)) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Chase-II: all `2^p` flip patterns on the `p` least reliable positions,
/// ordered by Hamming weight then lexicographically.
pub fn gen_chase(p: usize) -> PatternSet {
    assert!(p <= 20, "Chase-II with p={p} is too large");
    gen_restricted(p, p)
}

/// Restricted Chase: subsets of `[p]` of size at most `w_max`.
pub fn gen_restricted(p: usize, w_max: usize) -> PatternSet {
    assert!(w_max <= p, "w_max={w_max} exceeds p={p}");
    let patterns = (0..=w_max)
        .flat_map(|k| combinations(p, k))
        .map(Pattern::from_sorted_unchecked)
        .collect();
    PatternSet::new(p, patterns).expect("distinct subsets")
}

/// Distinct-part partitions of `total` with parts at most `max_part`, as
/// ascending supports.
fn distinct_partitions(total: usize, max_part: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            let mut s = cur.clone();
            s.reverse();
            out.push(s);
            return;
        }
        // Parts strictly decrease; the sum 1 + .. + part bounds what is reachable.
        for part in (1..=max_part.min(remaining)).rev() {
            if part * (part + 1) / 2 < remaining {
                break;
            }
            cur.push(part);
            rec(remaining - part, part - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, max_part, &mut Vec::new(), &mut out);
    out
}

/// The `q` patterns of length `n` with smallest logistic weight; ties go to
/// smaller Hamming weight, then to the smaller binary representation (position
/// 1 most significant). Enumerated level by level in logistic weight.
pub fn gen_lw(n: usize, q: usize) -> PatternSet {
    if n < 64 {
        assert!(q as u128 <= 1u128 << n, "q={q} exceeds 2^{n}");
    }
    let mut out = Vec::with_capacity(q);
    let max_total = n * (n + 1) / 2;
    let mut level = 0;
    while out.len() < q && level <= max_total {
        let mut patterns: Vec<Pattern> = distinct_partitions(level, n)
            .into_iter()
            .map(Pattern::from_sorted_unchecked)
            .collect();
        patterns.sort_by(|a, b| a.cmp_logistic(b));
        let take = (q - out.len()).min(patterns.len());
        out.extend(patterns.into_iter().take(take));
        level += 1;
    }
    PatternSet::new(n, out).expect("distinct supports")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &[usize]) -> Pattern {
        Pattern::new(s.to_vec()).unwrap()
    }

    #[test]
    fn pattern_weights_and_validation() {
        let x = p(&[1, 2, 4]);
        assert_eq!(x.hamming_weight(), 3);
        assert_eq!(x.logistic_weight(), 7);
        assert_eq!(x.i_max(), Some(4));
        assert!(Pattern::new(vec![2, 1]).is_err());
        assert!(Pattern::new(vec![0, 1]).is_err());
        assert!(Pattern::new(vec![3, 3]).is_err());
        assert_eq!(Pattern::from_bits(&[1, 1, 0, 1, 0]), x);
        assert_eq!(x.to_bits(5), vec![1, 1, 0, 1, 0]);
    }

    #[test]
    fn distances() {
        let a = p(&[1, 3, 5]);
        let b = p(&[2, 3]);
        assert_eq!(a.distance(&b), 3);
        assert!(a.within(&b, 3));
        assert!(!a.within(&b, 2));
        assert_eq!(a.xor(&b), p(&[1, 2, 5]));
    }

    #[test]
    fn chase_counts() {
        assert_eq!(gen_chase(0).len(), 1);
        assert!(gen_chase(0).patterns()[0].is_zero());
        assert_eq!(gen_chase(4).len(), 16);
        let c6 = gen_chase(6);
        assert_eq!(c6.len(), 64);
        let mut masks: Vec<u32> = c6
            .iter()
            .map(|x| x.support().iter().map(|&i| 1u32 << (i - 1)).sum())
            .collect();
        masks.sort_unstable();
        assert_eq!(masks, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn restricted_counts() {
        assert_eq!(gen_restricted(6, 3).len(), 42);
        assert_eq!(gen_restricted(8, 3).len(), 93);
        assert!(gen_restricted(5, 5).same_members(&gen_chase(5)));
        assert_eq!(gen_restricted(4, 0).len(), 1);
    }

    #[test]
    fn lw_small_cases() {
        let one = gen_lw(10, 1);
        assert_eq!(one.len(), 1);
        assert!(one.patterns()[0].is_zero());
        let all = gen_lw(4, 16);
        assert_eq!(all.len(), 16);
        let full: HashSet<Pattern> = (0u32..16).map(|m| Pattern::from_bits(&[m as u8 & 1, (m >> 1) as u8 & 1, (m >> 2) as u8 & 1, (m >> 3) as u8 & 1])).collect();
        assert!(all.iter().all(|x| full.contains(x)));
    }

    #[test]
    fn lw_toy_nineteen() {
        let expected: Vec<Vec<u8>> = vec![
            vec![0, 0, 0, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 0, 0],
            vec![0, 0, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0, 0, 1],
            vec![1, 1, 0, 0, 0, 0, 0],
            vec![1, 0, 1, 0, 0, 0, 0],
            vec![0, 1, 1, 0, 0, 0, 0],
            vec![1, 0, 0, 1, 0, 0, 0],
            vec![0, 1, 0, 1, 0, 0, 0],
            vec![0, 0, 1, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 1, 0, 0],
            vec![0, 1, 0, 0, 1, 0, 0],
            vec![1, 0, 0, 0, 0, 1, 0],
            vec![1, 1, 1, 0, 0, 0, 0],
            vec![1, 1, 0, 1, 0, 0, 0],
        ];
        let want = PatternSet::new(7, expected.iter().map(|b| Pattern::from_bits(b)).collect()).unwrap();
        assert!(gen_lw(7, 19).same_members(&want));
    }

    #[test]
    fn lw_tie_break_prefers_smaller_binary() {
        // Level 5 holds {5}, {1,4}, {2,3}: weight first, then {2,3} < {1,4}.
        let s = gen_lw(10, 10);
        let tail: Vec<&[usize]> = s.patterns()[7..10].iter().map(|x| x.support()).collect();
        assert_eq!(tail, vec![&[5][..], &[2, 3][..], &[1, 4][..]]);
    }

    #[test]
    fn lw_sets_are_subpattern_closed() {
        for n in [5, 8, 16, 128] {
            for q in [1, 2, 7, 19, 40, 128] {
                if n < 8 && q > 1 << n {
                    continue;
                }
                assert!(gen_lw(n, q).is_subpattern_closed(), "n={n} q={q}");
            }
        }
    }

    #[test]
    fn text_format_examples() {
        let set = PatternSet::new(7, vec![Pattern::zero(), p(&[1]), p(&[2, 5])]).unwrap();
        assert_eq!(set.to_text(), "n=7 q=3\n\n1\n2 5\n");
        let back = PatternSet::from_text(&set.to_text()).unwrap();
        assert_eq!(back, set);
        let last_zero = PatternSet::new(4, vec![p(&[1]), Pattern::zero()]).unwrap();
        assert_eq!(PatternSet::from_text(&last_zero.to_text()).unwrap(), last_zero);
        let noted = set.clone().with_comment("algorithm=mcoc snr_db=5.5 seed=1");
        assert!(noted.to_text().starts_with("# algorithm=mcoc"));
        assert_eq!(PatternSet::from_text(&noted.to_text()).unwrap(), noted);
        assert!(PatternSet::from_text("n=7 q=2\n1\n").is_err());
        assert!(PatternSet::from_text("n=7 q=1\n9\n").is_err());
        assert!(PatternSet::from_text("q=1\n\n").is_err());
        assert!(PatternSet::from_text("n=7 q=2\n1\n1\n").is_err());
    }
}
