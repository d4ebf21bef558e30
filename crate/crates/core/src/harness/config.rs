//! Experiment configuration: a flat `key = value` file whose keys mirror the
//! CLI flags. Flags given on the command line override file entries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Code family parameters: `m,t,ext`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    pub m: u32,
    pub t: usize,
    pub extended: bool,
}

impl CodeSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("code {s:?} must be `m,t,ext`")));
        }
        let m = parts[0].parse().map_err(|_| Error::Config(format!("bad m in {s:?}")))?;
        let t = parts[1].parse().map_err(|_| Error::Config(format!("bad t in {s:?}")))?;
        let extended = match parts[2] {
            "1" | "true" | "ext" | "yes" => true,
            "0" | "false" | "no" => false,
            other => return Err(Error::Config(format!("bad extension flag {other:?}"))),
        };
        Ok(Self { m, t, extended })
    }
}

/// Where a pattern set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSource {
    /// All `2^p` patterns on the `p` least reliable positions.
    Chase { p: usize },
    /// Patterns of weight at most `w_max` on `p` positions.
    Restricted { p: usize, w_max: usize },
    /// The `q` patterns of smallest logistic weight.
    Lw { q: usize },
    Mcoc { q: usize, snr_db: f64 },
    Greedy { q: usize, snr_db: f64 },
    File(PathBuf),
}

impl PatternSource {
    /// `chase:P`, `restricted:P:W`, `lw:Q`, `mcoc:Q:SNR`, `greedy:Q:SNR`;
    /// anything else is a pattern file path.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| Error::Config(format!("bad pattern source {s:?}")))
        };
        let real = |i: usize| -> Result<f64> {
            parts.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| Error::Config(format!("bad pattern source {s:?}")))
        };
        let arity = |k: usize| -> Result<()> {
            if parts.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("pattern source {s:?} expects {} parameter(s)", k - 1)))
            }
        };
        match parts[0] {
            "chase" => arity(2).and_then(|_| Ok(PatternSource::Chase { p: num(1)? })),
            "restricted" => arity(3).and_then(|_| Ok(PatternSource::Restricted { p: num(1)?, w_max: num(2)? })),
            "lw" => arity(2).and_then(|_| Ok(PatternSource::Lw { q: num(1)? })),
            "mcoc" => arity(3).and_then(|_| Ok(PatternSource::Mcoc { q: num(1)?, snr_db: real(2)? })),
            "greedy" => arity(3).and_then(|_| Ok(PatternSource::Greedy { q: num(1)?, snr_db: real(2)? })),
            _ => Ok(PatternSource::File(PathBuf::from(s))),
        }
    }
}

/// LER evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Direct simulation of transmissions and list decoding.
    Mc,
    /// Average covered-space probability over channel realizations.
    Cov,
    /// Order-statistics formulas.
    Os,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Method::Mc),
            "cov" => Ok(Method::Cov),
            "os" => Ok(Method::Os),
            other => Err(Error::Config(format!("unknown method {other:?} (mc, cov, os)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Cov => "cov",
            Method::Os => "os",
        }
    }
}

/// `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad SNR grid {s:?}"));
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let [a, b, step] = parts[..] else {
            return Err(bad());
        };
        if step <= 0.0 || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| a + step * i as f64).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("SNR grid {s:?} must be ascending")));
    }
    Ok(grid)
}

/// Everything one evaluation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    /// Pattern source as written (kept for output labels).
    pub patterns: String,
    pub snr_db: Vec<f64>,
    pub method: Method,
    /// Monte Carlo: stop a point after this many list errors.
    pub min_errors: u64,
    /// Monte Carlo: stop a point after this many transmitted blocks.
    pub max_blocks: u64,
    /// Covered-space realizations per point (default 2000), or sampling
    /// trials per error count for the order-statistics method (default 10^6).
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// Candidate horizon for greedy designs; when absent it starts at 64 per
    /// pattern and doubles until the pruning bound holds.
    pub horizon: Option<usize>,
}

/// Keys accepted in config files and as flags.
pub const KEYS: &[&str] = &[
    "code", "snr-db", "patterns", "method", "min-errors", "max-blocks", "samples", "seed", "workers", "out",
    "horizon", "axis", "values", "algorithm", "q",
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Config(format!("bad value {v:?} for {key}"))),
    }
}

fn required<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key).map(String::as_str).ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
}

impl ExperimentConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let code = CodeSpec::parse(required(map, "code")?)?;
        let patterns = required(map, "patterns")?.to_string();
        // A `{q}` placeholder is filled in per point by a q sweep.
        PatternSource::parse(&patterns.replace("{q}", "1"))?;
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let cfg = Self {
            code,
            patterns,
            snr_db: parse_snr_grid(required(map, "snr-db")?)?,
            method: Method::parse(map.get("method").map_or("mc", String::as_str))?,
            min_errors: get(map, "min-errors", 100)?,
            max_blocks: get(map, "max-blocks", 10_000_000)?,
            samples: 0,
            seed: get(map, "seed", 1)?,
            workers: get(map, "workers", default_workers)?,
            horizon: map.get("horizon").map(|v| v.parse()).transpose().map_err(|_| Error::Config("bad horizon".into()))?,
        };
        let mut cfg = cfg;
        let default_samples = if cfg.method == Method::Os { 1_000_000 } else { 2000 };
        cfg.samples = get(map, "samples", default_samples)?;
        if cfg.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(cfg)
    }
}
