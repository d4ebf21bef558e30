//! Experiment orchestration: Monte Carlo, covered-space and order-statistics
//! evaluation of list error rates, sweeps, and CSV output.

pub mod config;
pub mod selftest;

pub use config::{parse_config_text, parse_snr_grid, read_config_file, CodeSpec, ExperimentConfig, Method, PatternSource};

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{llr, sigma_from_ebn0_db, sort_by_reliability, transmit};
use crate::codes::Code;
use crate::decoder::{chase_decode_sorted, CoveredSpace};
use crate::design::{greedy_design, mcoc_design};
use crate::error::{Error, Result};
use crate::order_stats::{ler_chase, ler_lw, ler_restricted};
use crate::patterns::{gen_chase, gen_lw, gen_restricted, position_error_probs, ModelMethod, PatternSet};
use crate::stats::{shard_rng, Estimate, SHARDS};

/// First line of every CSV file written by the harness.
pub const CSV_VERSION: &str = "# chase-lab csv v1";
pub const CSV_HEADER: &str = "code,method,patterns,q,snr_db,ler,ler_stderr,bler,bler_stderr,samples,list_errors,seed";

/// Trials per shard between stopping-rule checks.
const MC_BATCH: u64 = 256;

/// A list-error-rate estimate tagged with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LerEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub samples: u64,
}

impl LerEstimate {
    fn from_estimate(e: Estimate, method: Method) -> Self {
        Self { value: e.value.clamp(0.0, 1.0), stderr: e.stderr.max(0.0), method, samples: e.samples }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, stderr: self.stderr, samples: self.samples }
    }
}

/// One evaluated SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub code: String,
    pub patterns: String,
    pub q: usize,
    pub snr_db: f64,
    pub ler: LerEstimate,
    /// Block error rate (Monte Carlo only).
    pub bler: Option<Estimate>,
    /// List errors observed (Monte Carlo only).
    pub list_errors: Option<u64>,
    pub seed: u64,
}

pub fn build_code(spec: CodeSpec) -> Result<Code> {
    Code::bch(spec.m, spec.t, spec.extended)
}

/// Materializes a pattern set of the code's length.
pub fn load_patterns(source: &PatternSource, code: &Code, horizon: Option<usize>) -> Result<PatternSet> {
    let n = code.n();
    let fit = |set: PatternSet| -> Result<PatternSet> {
        if set.n() > n {
            return Err(Error::Config(format!("pattern set length {} exceeds n={n}", set.n())));
        }
        set.with_length(n)
    };
    let model_at = |snr_db: f64| position_error_probs(n, sigma_from_ebn0_db(snr_db, code.rate()), ModelMethod::Integral);
    match source {
        PatternSource::Chase { p } => fit(gen_chase(*p)),
        PatternSource::Restricted { p, w_max } => {
            if w_max > p {
                return Err(Error::Config(format!("w_max={w_max} exceeds p={p}")));
            }
            fit(gen_restricted(*p, *w_max))
        }
        PatternSource::Lw { q } => Ok(gen_lw(n, *q)),
        PatternSource::Mcoc { q, snr_db } => mcoc_design(&model_at(*snr_db)?, code.t(), *q),
        PatternSource::Greedy { q, snr_db } => greedy_design(&model_at(*snr_db)?, code.t(), *q, horizon),
        PatternSource::File(path) => fit(PatternSet::from_text(&std::fs::read_to_string(path)?)?),
    }
}

/// Monte Carlo result at one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub ler: Estimate,
    pub bler: Estimate,
    pub list_errors: u64,
    pub block_errors: u64,
    pub blocks: u64,
}

/// Simulates random codewords over the channel and list-decodes them until
/// `min_errors` list errors or `max_blocks` blocks. A decoder that finds no
/// codeword counts as a block error.
pub fn mc_point(
    code: &Code,
    set: &PatternSet,
    sigma: f64,
    min_errors: u64,
    max_blocks: u64,
    seed: u64,
    stream: u64,
) -> Result<McPoint> {
    if set.n() != code.n() {
        return Err(Error::LengthMismatch { expected: code.n(), actual: set.n() });
    }
    let mut rngs: Vec<_> = (0..SHARDS as u64).map(|s| shard_rng(seed, stream, s)).collect();
    let (mut list_errors, mut block_errors, mut blocks) = (0u64, 0u64, 0u64);
    while blocks < max_blocks && list_errors < min_errors {
        let per_shard = MC_BATCH.min((max_blocks - blocks).div_ceil(SHARDS as u64)).max(1);
        let counts: Vec<(u64, u64)> = rngs
            .par_iter_mut()
            .map(|rng| {
                let (mut le, mut be) = (0u64, 0u64);
                for _ in 0..per_shard {
                    let msg: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
                    let c = code.encode(&msg).expect("message length k");
                    let l = llr(&transmit(&c, sigma, rng), sigma);
                    let sorted = sort_by_reliability(&l);
                    let (decoded, list) = chase_decode_sorted(code, &l, &sorted, set).expect("lengths checked");
                    le += !list.contains(&c) as u64;
                    be += (decoded.as_ref() != Some(&c)) as u64;
                }
                (le, be)
            })
            .collect();
        for (le, be) in counts {
            list_errors += le;
            block_errors += be;
        }
        blocks += per_shard * SHARDS as u64;
    }
    Ok(McPoint {
        ler: Estimate::from_counts(list_errors, blocks),
        bler: Estimate::from_counts(block_errors, blocks),
        list_errors,
        block_errors,
        blocks,
    })
}

/// Mean of `1 - P_cov(y)` over `samples` channel realizations, with the
/// standard error of the mean. The all-zero codeword is sent: the covered
/// space depends only on the noise through the reliabilities.
pub fn cov_point(n: usize, t: usize, set: &PatternSet, sigma: f64, samples: u64, seed: u64, stream: u64) -> Result<Estimate> {
    if set.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: set.n() });
    }
    let space = CoveredSpace::new(set, t)?;
    let per_shard = samples.div_ceil(SHARDS as u64).max(1);
    let zero = crate::codes::Word::zeros(n);
    let sums: Vec<(f64, f64)> = (0..SHARDS as u64)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(seed, stream, shard);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per_shard {
                let l = llr(&transmit(&zero, sigma, &mut rng), sigma);
                let miss = (1.0 - space.prob_sorted(&sort_by_reliability(&l))).max(0.0);
                s += miss;
                s2 += miss * miss;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(Estimate::from_moments(s, s2, per_shard * SHARDS as u64))
}

/// Order-statistics LER at one noise level; only structured sources apply.
pub fn os_point(code: &Code, source: &PatternSource, sigma: f64, trials: u64, seed: u64) -> Result<Estimate> {
    let (n, t) = (code.n(), code.t());
    match source {
        PatternSource::Chase { p } => Ok(Estimate::exact(ler_chase(n, t, sigma, *p)?)),
        PatternSource::Restricted { p, w_max } => Ok(Estimate::exact(ler_restricted(n, t, sigma, *p, *w_max)?)),
        PatternSource::Lw { q } => ler_lw(n, t, sigma, &gen_lw(n, *q), trials, seed),
        _ => Err(Error::Unsupported(
            "order-statistics evaluation needs a chase, restricted or lw source; use --method cov or mc".into(),
        )),
    }
}

fn stream_id(point: usize) -> u64 {
    point as u64 + 1
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Monte Carlo LER and BLER per SNR point.
pub fn run_mc(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let code = build_code(cfg.code)?;
    let set = load_patterns(&PatternSource::parse(&cfg.patterns)?, &code, cfg.horizon)?;
    with_workers(cfg.workers, || {
        cfg.snr_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let sigma = sigma_from_ebn0_db(snr, code.rate());
                let pt = mc_point(&code, &set, sigma, cfg.min_errors, cfg.max_blocks, cfg.seed, stream_id(i))?;
                Ok(Row {
                    code: code.label(),
                    patterns: cfg.patterns.clone(),
                    q: set.len(),
                    snr_db: snr,
                    ler: LerEstimate::from_estimate(pt.ler, Method::Mc),
                    bler: Some(pt.bler),
                    list_errors: Some(pt.list_errors),
                    seed: cfg.seed,
                })
            })
            .collect()
    })?
}

/// Covered-space LER per SNR point.
pub fn run_cov(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let code = build_code(cfg.code)?;
    let set = load_patterns(&PatternSource::parse(&cfg.patterns)?, &code, cfg.horizon)?;
    CoveredSpace::new(&set, code.t()).map_err(|e| match e {
        Error::BudgetExceeded { .. } => Error::Unsupported(format!("{e}; use --method mc for this pattern set")),
        other => other,
    })?;
    with_workers(cfg.workers, || {
        cfg.snr_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let sigma = sigma_from_ebn0_db(snr, code.rate());
                let est = cov_point(code.n(), code.t(), &set, sigma, cfg.samples, cfg.seed, stream_id(i))?;
                Ok(Row {
                    code: code.label(),
                    patterns: cfg.patterns.clone(),
                    q: set.len(),
                    snr_db: snr,
                    ler: LerEstimate::from_estimate(est, Method::Cov),
                    bler: None,
                    list_errors: None,
                    seed: cfg.seed,
                })
            })
            .collect()
    })?
}

/// Order-statistics LER per SNR point (points evaluated in parallel).
pub fn run_os(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let code = build_code(cfg.code)?;
    let source = PatternSource::parse(&cfg.patterns)?;
    let q = match &source {
        PatternSource::Chase { p } => 1usize << p,
        PatternSource::Restricted { p, w_max } => gen_restricted(*p, *w_max).len(),
        PatternSource::Lw { q } => (*q).min(1usize.checked_shl(code.n() as u32).unwrap_or(usize::MAX)),
        _ => 0,
    };
    with_workers(cfg.workers, || {
        cfg.snr_db
            .par_iter()
            .map(|&snr| {
                let sigma = sigma_from_ebn0_db(snr, code.rate());
                let est = os_point(&code, &source, sigma, cfg.samples, cfg.seed)?;
                Ok(Row {
                    code: code.label(),
                    patterns: cfg.patterns.clone(),
                    q,
                    snr_db: snr,
                    ler: LerEstimate::from_estimate(est, Method::Os),
                    bler: None,
                    list_errors: None,
                    seed: cfg.seed,
                })
            })
            .collect()
    })?
}

/// Dispatches on the configured method.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    match cfg.method {
        Method::Mc => run_mc(cfg),
        Method::Cov => run_cov(cfg),
        Method::Os => run_os(cfg),
    }
}

/// Sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// The configured SNR grid.
    Snr,
    /// Substitutes each value for `{q}` in the pattern source.
    Q(Vec<usize>),
}

/// Evaluates every combination of sweep value and SNR point.
pub fn run_sweep(cfg: &ExperimentConfig, sweep: &Sweep) -> Result<Vec<Row>> {
    match sweep {
        Sweep::Snr => run(cfg),
        Sweep::Q(values) => {
            if !cfg.patterns.contains("{q}") {
                return Err(Error::Config("a q sweep needs `{q}` in the pattern source, e.g. lw:{q}".into()));
            }
            let mut rows = Vec::new();
            for &q in values {
                let mut c = cfg.clone();
                c.patterns = cfg.patterns.replace("{q}", &q.to_string());
                rows.extend(run(&c)?);
            }
            Ok(rows)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Versioned CSV with a fixed header.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_VERSION}");
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let (bler, bler_se) = match r.bler {
            Some(b) => (format!("{:.6e}", b.value), format!("{:.6e}", b.stderr)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{:.3},{:.6e},{:.6e},{},{},{},{},{}",
            csv_field(&r.code),
            r.ler.method.name(),
            csv_field(&r.patterns),
            r.q,
            r.snr_db,
            r.ler.value,
            r.ler.stderr,
            bler,
            bler_se,
            r.ler.samples,
            r.list_errors.map_or(String::new(), |e| e.to_string()),
            r.seed
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::prob_bdd;

    fn cfg(method: &str, patterns: &str, snr: &str) -> ExperimentConfig {
        let text = format!("code=4,1,0\npatterns={patterns}\nsnr-db={snr}\nmethod={method}\nmin-errors=50\nmax-blocks=200000\nsamples=4000\nworkers=2\n");
        ExperimentConfig::from_map(&parse_config_text(&text).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let code = Code::bch(4, 1, false).unwrap();
        let set = gen_lw(15, 8);
        let pt = mc_point(&code, &set, 1e-6, 10, 4096, 1, 0).unwrap();
        assert_eq!(pt.list_errors, 0);
        assert_eq!(pt.block_errors, 0);
        // Missing the transmitted word forces a wrong decision.
        assert!(pt.block_errors >= pt.list_errors);
    }

    #[test]
    fn zero_pattern_cov_matches_bdd_failure() {
        let code = Code::bch(4, 1, false).unwrap();
        let set = gen_lw(15, 1);
        let sigma = sigma_from_ebn0_db(3.0, code.rate());
        let est = cov_point(15, 1, &set, sigma, 20_000, 2, 0).unwrap();
        let exact = 1.0 - prob_bdd(15, 1, sigma);
        assert!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn methods_agree_on_a_small_code() {
        let rows: Vec<Vec<Row>> =
            ["mc", "cov", "os"].iter().map(|m| run(&cfg(m, "lw:12", "3:4:1")).unwrap()).collect();
        for i in 0..2 {
            let e: Vec<Estimate> = rows.iter().map(|r| r[i].ler.estimate()).collect();
            for a in 0..3 {
                for b in a + 1..3 {
                    assert!(e[a].agrees_with(&e[b], 0.1, 3.0), "point {i}: {:?} vs {:?}", e[a], e[b]);
                }
            }
        }
        assert!(rows[0][0].bler.unwrap().value >= rows[0][0].ler.value);
    }

    #[test]
    fn os_rejects_designed_sets() {
        assert!(matches!(run(&cfg("os", "mcoc:4:3", "3")), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_is_versioned_and_reproducible() {
        let c = cfg("cov", "chase:3", "3:4:0.5");
        let a = to_csv(&run(&c).unwrap());
        let b = to_csv(&run(&c).unwrap());
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION));
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 3);
        assert!(a.contains("\"(15,11)\""));
    }

    #[test]
    fn q_sweep_substitutes_counts() {
        let c = cfg("os", "lw:{q}", "3.5");
        let rows = run_sweep(&c, &Sweep::Q(vec![1, 4, 16])).unwrap();
        assert_eq!(rows.iter().map(|r| r.q).collect::<Vec<_>>(), vec![1, 4, 16]);
        assert!(rows.windows(2).all(|w| w[1].ler.value <= w[0].ler.value + 3.0 * w[0].ler.stderr));
        assert!(run_sweep(&cfg("os", "lw:4", "3"), &Sweep::Q(vec![1])).is_err());
    }
}
