use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chase_core::channel::sigma_from_ebn0_db;
use chase_core::design::{greedy_design, mcoc_design};
use chase_core::harness::{
    build_code, read_config_file, run, run_sweep, selftest, to_csv, CodeSpec, ExperimentConfig, Sweep,
};
use chase_core::patterns::{position_error_probs, ModelMethod};
use chase_core::{Error, Result};

#[derive(Parser)]
#[command(name = "chase-lab", version, about = "List error rates and test-pattern design for Chase-like BCH decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a pattern set and write it as a pattern file.
    Design {
        #[command(flatten)]
        common: Common,
        /// greedy or mcoc
        #[arg(long)]
        algorithm: Option<String>,
        /// Number of patterns.
        #[arg(long)]
        q: Option<String>,
    },
    /// Evaluate one pattern source over an SNR grid and write CSV.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate over the SNR grid or over pattern counts substituted for `{q}`.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// snr or q
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated pattern counts for a q sweep.
        #[arg(long)]
        values: Option<String>,
    },
    /// Run the brute-force oracle checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Flags shared by the experiment subcommands. Each mirrors a config key and
/// overrides the file.
#[derive(Args)]
struct Common {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// m,t,ext e.g. 7,1,1 for the extended (128,120) code.
    #[arg(long)]
    code: Option<String>,
    /// a:b:step or a comma list, in dB.
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
    /// chase:P, restricted:P:W, lw:Q, mcoc:Q:SNR, greedy:Q:SNR or a file path.
    #[arg(long)]
    patterns: Option<String>,
    /// mc, cov or os.
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "min-errors")]
    min_errors: Option<String>,
    #[arg(long = "max-blocks")]
    max_blocks: Option<String>,
    /// Realizations for cov, trials for os.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Candidate horizon for greedy design.
    #[arg(long)]
    horizon: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn settings(&self, extra: &[(&str, &Option<String>)]) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("code", &self.code),
            ("snr-db", &self.snr_db),
            ("patterns", &self.patterns),
            ("method", &self.method),
            ("min-errors", &self.min_errors),
            ("max-blocks", &self.max_blocks),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("horizon", &self.horizon),
        ];
        for (key, value) in flags.iter().chain(extra) {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        if let Some(out) = &self.out {
            map.insert("out".into(), out.display().to_string());
        }
        Ok(map)
    }
}

fn required<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key).map(String::as_str).ok_or_else(|| Error::Config(format!("missing {key}")))
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    required(map, key)?.parse().map_err(|_| Error::Config(format!("bad {key}")))
}

fn emit(map: &BTreeMap<String, String>, text: &str) -> Result<()> {
    match map.get("out") {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn design(map: &BTreeMap<String, String>) -> Result<String> {
    let code = build_code(CodeSpec::parse(required(map, "code")?)?)?;
    let snr_db: f64 = parse(map, "snr-db")?;
    let q: usize = parse(map, "q")?;
    let horizon = map.get("horizon").map(|_| parse::<usize>(map, "horizon")).transpose()?;
    let model = position_error_probs(code.n(), sigma_from_ebn0_db(snr_db, code.rate()), ModelMethod::Integral)?;
    let set = match required(map, "algorithm")? {
        "greedy" => greedy_design(&model, code.t(), q, horizon)?,
        "mcoc" => mcoc_design(&model, code.t(), q)?,
        other => return Err(Error::Config(format!("unknown algorithm {other:?}; expected greedy or mcoc"))),
    };
    let set = set.with_comment(format!("code={} snr_db={snr_db} model=integral", code.label()));
    Ok(set.to_text())
}

fn sweep(map: &BTreeMap<String, String>) -> Result<String> {
    let cfg = ExperimentConfig::from_map(map)?;
    let axis = match map.get("axis").map_or("snr", String::as_str) {
        "snr" => Sweep::Snr,
        "q" => {
            let values = required(map, "values")?
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::Config(format!("bad q value {v:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            Sweep::Q(values)
        }
        other => return Err(Error::Config(format!("unknown axis {other:?}; expected snr or q"))),
    };
    Ok(to_csv(&run_sweep(&cfg, &axis)?))
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Design { common, algorithm, q } => {
            let map = common.settings(&[("algorithm", &algorithm), ("q", &q)])?;
            emit(&map, &design(&map)?)?;
        }
        Command::Eval { common } => {
            let map = common.settings(&[])?;
            emit(&map, &to_csv(&run(&ExperimentConfig::from_map(&map)?)?))?;
        }
        Command::Sweep { common, axis, values } => {
            let map = common.settings(&[("axis", &axis), ("values", &values)])?;
            emit(&map, &sweep(&map)?)?;
        }
        Command::Selftest { seed } => {
            let checks = selftest::run_all(seed);
            for c in &checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
