//! Binary primitive narrow-sense BCH codes and their optional overall-parity
//! extension: construction, systematic encoding, bounded-distance decoding
//! (syndromes, Berlekamp–Massey, Chien search) and a brute-force ML decoder
//! for tiny codes.
//!
//! Bit layout of a codeword: message bits first, then the `n_core - k` parity
//! bits of the cyclic code, then the extension bit when present. Core index
//! `i` carries the coefficient of `x^(n_core - 1 - i)`.

mod gf;

pub use gf::GaloisField;

use crate::error::{Error, Result};

/// Largest dimension accepted by the brute-force ML decoder.
pub const ML_MAX_K: usize = 16;

/// A binary vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn zeros(n: usize) -> Self {
        Word(vec![0; n])
    }

    /// Builds a word from bits; any nonzero byte counts as 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Word(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn distance(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn xor(&self, other: &Word) -> Word {
        Word(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    /// Correlation metric `sum_i (1 - 2 c_i) l_i`.
    pub fn correlation(&self, llr: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(llr)
            .map(|(&c, &l)| if c == 0 { l } else { -l })
            .sum()
    }
}

/// Correction found by the bounded-distance decoder, relative to its input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BddCorrection {
    /// Core indices to flip.
    pub core_errors: Vec<usize>,
    /// Whether the extension bit differs from the input (extended codes only).
    pub parity_flip: bool,
}

impl BddCorrection {
    pub fn distance(&self) -> usize {
        self.core_errors.len() + self.parity_flip as usize
    }
}

/// An `(n, k, t)` binary BCH code, optionally extended by an overall parity bit.
#[derive(Debug, Clone)]
pub struct Code {
    field: GaloisField,
    t: usize,
    n_core: usize,
    k: usize,
    extended: bool,
    /// Generator polynomial coefficients, lowest degree first.
    generator: Vec<u8>,
    /// Per core index, its contribution `alpha^(j e)` to syndromes `S_1..S_2t`.
    syndrome_columns: Vec<Vec<u16>>,
}

impl Code {
    /// Builds the primitive narrow-sense BCH code over GF(2^m) with designed
    /// distance `2t + 1`.
    pub fn bch(m: u32, t: usize, extended: bool) -> Result<Self> {
        let field = GaloisField::new(m)?;
        let n_core = field.order();
        if t == 0 {
            return Err(Error::InvalidCode("error-correction capability t must be at least 1".into()));
        }
        if 2 * t + 1 > n_core {
            return Err(Error::InvalidCode(format!(
                "designed distance {} exceeds length {n_core}",
                2 * t + 1
            )));
        }
        let generator = generator_poly(&field, t);
        let deg = generator.len() - 1;
        if deg >= n_core {
            return Err(Error::InvalidCode(format!("m={m}, t={t} leaves no information bits")));
        }
        let k = n_core - deg;
        let syndrome_columns = (0..n_core)
            .map(|i| {
                let e = (n_core - 1 - i) as i64;
                (1..=2 * t as i64).map(|j| field.alpha_pow(j * e)).collect()
            })
            .collect();
        Ok(Self { field, t, n_core, k, extended, generator, syndrome_columns })
    }

    pub fn n(&self) -> usize {
        self.n_core + self.extended as usize
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> u32 {
        self.field.degree()
    }

    pub fn n_core(&self) -> usize {
        self.n_core
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    /// `(n,k)` label used in reports.
    pub fn label(&self) -> String {
        format!("({},{})", self.n(), self.k)
    }

    /// Systematic encoding of a `k`-bit message.
    pub fn encode(&self, message: &[u8]) -> Result<Word> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, actual: message.len() });
        }
        let deg = self.n_core - self.k;
        // Work buffer indexed by exponent.
        let mut rem = vec![0u8; self.n_core];
        for (j, &b) in message.iter().enumerate() {
            rem[self.n_core - 1 - j] = (b != 0) as u8;
        }
        for e in (deg..self.n_core).rev() {
            if rem[e] == 1 {
                for (d, &g) in self.generator.iter().enumerate() {
                    rem[e - deg + d] ^= g;
                }
            }
        }
        let mut bits = Vec::with_capacity(self.n());
        bits.extend(message.iter().map(|&b| (b != 0) as u8));
        bits.extend((0..deg).rev().map(|e| rem[e]));
        if self.extended {
            let parity = bits.iter().fold(0u8, |acc, &b| acc ^ b);
            bits.push(parity);
        }
        Ok(Word(bits))
    }

    /// Message bits of a codeword.
    pub fn message_of<'a>(&self, word: &'a Word) -> &'a [u8] {
        &word.0[..self.k]
    }

    pub fn is_codeword(&self, word: &Word) -> bool {
        word.len() == self.n()
            && self.syndromes(word).iter().all(|&s| s == 0)
            && (!self.extended || word.weight().is_multiple_of(2))
    }

    /// Syndromes `S_1..S_2t` of the core part.
    pub fn syndromes(&self, word: &Word) -> Vec<u16> {
        let mut syn = vec![0u16; 2 * self.t];
        for (i, &b) in word.0[..self.n_core].iter().enumerate() {
            if b != 0 {
                self.add_syndrome_column(&mut syn, i);
            }
        }
        syn
    }

    /// XORs the syndrome contribution of core index `i` into `syn`.
    #[inline]
    pub fn add_syndrome_column(&self, syn: &mut [u16], i: usize) {
        for (s, &c) in syn.iter_mut().zip(&self.syndrome_columns[i]) {
            *s ^= c;
        }
    }

    /// Core error locations for the given syndromes, if at most `t` errors
    /// explain them.
    pub fn locate_errors(&self, syn: &[u16]) -> Option<Vec<usize>> {
        if syn.iter().all(|&s| s == 0) {
            return Some(Vec::new());
        }
        let locator = self.berlekamp_massey(syn)?;
        let nu = locator.len() - 1;
        if nu == 1 {
            // Lambda(x) = 1 + X x, so the error locator is X directly.
            let e = self.field.log(locator[1]);
            return Some(vec![self.n_core - 1 - e]);
        }
        let mut found = Vec::with_capacity(nu);
        for e in 0..self.n_core {
            // Evaluate Lambda(alpha^-e).
            let mut acc = 1u16;
            for (j, &c) in locator.iter().enumerate().skip(1) {
                if c != 0 {
                    acc ^= self.field.mul(c, self.field.alpha_pow(-((e * j) as i64)));
                }
            }
            if acc == 0 {
                found.push(self.n_core - 1 - e);
                if found.len() == nu {
                    break;
                }
            }
        }
        if found.len() != nu {
            return None;
        }
        found.sort_unstable();
        Some(found)
    }

    /// Error-locator polynomial (lowest degree first, trimmed), or `None` when
    /// its degree exceeds `t`.
    fn berlekamp_massey(&self, syn: &[u16]) -> Option<Vec<u16>> {
        let gf = &self.field;
        let two_t = syn.len();
        let mut c = vec![0u16; two_t + 1];
        let mut b = vec![0u16; two_t + 1];
        c[0] = 1;
        b[0] = 1;
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut last = 1u16;
        for step in 0..two_t {
            let mut d = syn[step];
            for i in 1..=len {
                d ^= gf.mul(c[i], syn[step - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = gf.div(d, last);
            let prev = c.clone();
            for i in 0..(two_t + 1).saturating_sub(shift) {
                if b[i] != 0 {
                    c[i + shift] ^= gf.mul(coef, b[i]);
                }
            }
            if 2 * len <= step {
                len = step + 1 - len;
                b = prev;
                last = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        if len > self.t {
            return None;
        }
        let deg = c.iter().rposition(|&x| x != 0).unwrap_or(0);
        if deg != len {
            return None;
        }
        c.truncate(len + 1);
        Some(c)
    }

    /// Bounded-distance decoding from precomputed syndromes.
    ///
    /// `input_core_parity` is the XOR of the input's core bits and
    /// `input_parity_bit` its extension bit; both are ignored for
    /// non-extended codes. For extended codes the core is decoded, the
    /// extension bit is recomputed, and the result is rejected when it lies
    /// farther than `t` from the input over all `n` positions.
    pub fn bdd_from_syndromes(
        &self,
        syn: &[u16],
        input_core_parity: u8,
        input_parity_bit: u8,
    ) -> Option<BddCorrection> {
        let core_errors = self.locate_errors(syn)?;
        let parity_flip = if self.extended {
            let decoded_parity = input_core_parity ^ (core_errors.len() % 2) as u8;
            decoded_parity != input_parity_bit
        } else {
            false
        };
        let corr = BddCorrection { core_errors, parity_flip };
        (corr.distance() <= self.t).then_some(corr)
    }

    /// Bounded-distance decoding of a received hard-decision word.
    pub fn bdd_decode(&self, word: &Word) -> Result<Option<Word>> {
        if word.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), actual: word.len() });
        }
        let syn = self.syndromes(word);
        let core_parity = word.0[..self.n_core].iter().fold(0u8, |a, &b| a ^ b);
        let parity_bit = if self.extended { word.0[self.n_core] } else { 0 };
        Ok(self.bdd_from_syndromes(&syn, core_parity, parity_bit).map(|corr| {
            let mut out = word.clone();
            for &i in &corr.core_errors {
                out.flip(i);
            }
            if corr.parity_flip {
                out.flip(self.n_core);
            }
            out
        }))
    }

    /// All `2^k` codewords, in message order. Only for `k <= ML_MAX_K`.
    pub fn codebook(&self) -> Result<Vec<Word>> {
        if self.k > ML_MAX_K {
            return Err(Error::CodeTooLarge { k: self.k, limit: ML_MAX_K });
        }
        (0..1u32 << self.k)
            .map(|msg| {
                let bits: Vec<u8> = (0..self.k).map(|j| ((msg >> (self.k - 1 - j)) & 1) as u8).collect();
                self.encode(&bits)
            })
            .collect()
    }

    /// Maximum-likelihood decoding by exhaustive correlation search.
    pub fn ml_decode_bruteforce(&self, llr: &[f64]) -> Result<Word> {
        if llr.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), actual: llr.len() });
        }
        let book = self.codebook()?;
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (i, c) in book.iter().enumerate() {
            let metric = c.correlation(llr);
            if metric > best_metric {
                best_metric = metric;
                best = i;
            }
        }
        Ok(book[best].clone())
    }
}

/// Product of the distinct minimal polynomials of `alpha^1 .. alpha^2t`.
fn generator_poly(field: &GaloisField, t: usize) -> Vec<u8> {
    let order = field.order();
    let mut seen = vec![false; order];
    let mut g: Vec<u8> = vec![1];
    for i in 1..=2 * t {
        if seen[i % order] {
            continue;
        }
        // Cyclotomic coset of i.
        let mut coset = Vec::new();
        let mut j = i % order;
        while !seen[j] {
            seen[j] = true;
            coset.push(j);
            j = (2 * j) % order;
        }
        // Minimal polynomial prod (x + alpha^j) over GF(2^m); coefficients land in GF(2).
        let mut mp: Vec<u16> = vec![1];
        for &j in &coset {
            let root = field.alpha_pow(j as i64);
            let mut next = vec![0u16; mp.len() + 1];
            for (d, &c) in mp.iter().enumerate() {
                next[d + 1] ^= c;
                next[d] ^= field.mul(c, root);
            }
            mp = next;
        }
        debug_assert!(mp.iter().all(|&c| c <= 1));
        let mut prod = vec![0u8; g.len() + mp.len() - 1];
        for (a, &ga) in g.iter().enumerate() {
            if ga == 0 {
                continue;
            }
            for (b, &mb) in mp.iter().enumerate() {
                prod[a + b] ^= mb as u8;
            }
        }
        g = prod;
    }
    g
}
