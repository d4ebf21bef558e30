use std::collections::BTreeMap;

use chase_core::channel::sigma_from_ebn0_db;
use chase_core::codes::Code;
use chase_core::harness::{cov_point, mc_point, run, run_sweep, ExperimentConfig, Row, Sweep};
use chase_core::order_stats::ler_restricted;
use chase_core::patterns::gen_lw;

fn config(pairs: &[(&str, &str)]) -> ExperimentConfig {
    let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::from_map(&map).unwrap()
}

fn ler_at(rows: &[Row], patterns: &str) -> f64 {
    rows.iter().find(|r| r.patterns == patterns).unwrap().ler.value
}

#[test]
fn ler_does_not_increase_along_nested_lw_sets() {
    // Same seed, same realizations: the covered space only grows with q.
    let cfg = config(&[("code", "6,2,1"), ("patterns", "lw:{q}"), ("snr-db", "5"), ("method", "cov"), ("samples", "500")]);
    let rows = run_sweep(&cfg, &Sweep::Q(vec![1, 4, 16, 32, 64, 128])).unwrap();
    assert!(rows.windows(2).all(|w| w[1].ler.value <= w[0].ler.value + 1e-15), "{rows:?}");
}

#[test]
fn ler_falls_with_snr() {
    let cfg = config(&[("code", "7,1,1"), ("patterns", "lw:16"), ("snr-db", "3:6:1"), ("method", "os"), ("samples", "100000")]);
    let rows = run(&cfg).unwrap();
    assert!(rows.windows(2).all(|w| w[1].ler.value < w[0].ler.value), "{rows:?}");
}

#[test]
fn covered_space_has_lower_variance_than_counting() {
    let code = Code::bch(7, 1, true).unwrap();
    let set = gen_lw(128, 16);
    let sigma = sigma_from_ebn0_db(5.0, code.rate());
    let mc = mc_point(&code, &set, sigma, u64::MAX, 4096, 3, 1).unwrap();
    let cov = cov_point(128, 1, &set, sigma, 4096, 3, 1).unwrap();
    assert_eq!(mc.blocks, 4096);
    assert!(cov.stderr < mc.ler.stderr, "cov {cov:?} mc {:?}", mc.ler);
}

#[test]
fn block_errors_include_every_list_error_with_a_decision() {
    let code = Code::bch(5, 2, false).unwrap();
    let set = gen_lw(31, 8);
    let pt = mc_point(&code, &set, sigma_from_ebn0_db(3.0, code.rate()), 200, 1_000_000, 4, 1).unwrap();
    // c not in the list means the decision is not c.
    assert!(pt.block_errors >= pt.list_errors);
    assert!(pt.list_errors >= 200);
}

#[test]
fn covered_space_matches_order_statistics_for_restricted_sets() {
    let cfg = config(&[
        ("code", "8,2,1"),
        ("patterns", "restricted:8:3"),
        ("snr-db", "5.5"),
        ("method", "cov"),
        ("samples", "3000"),
    ]);
    let row = &run(&cfg).unwrap()[0];
    let code = Code::bch(8, 2, true).unwrap();
    let exact = ler_restricted(256, 2, sigma_from_ebn0_db(5.5, code.rate()), 8, 3).unwrap();
    assert!((row.ler.value - exact).abs() < 3.0 * row.ler.stderr, "{} vs {exact}", row.ler.value);
}

#[test]
fn designed_sets_order_as_expected_at_matched_size() {
    let snr = "5.5";
    let base = [("code", "8,2,1"), ("snr-db", snr), ("method", "cov"), ("samples", "2000")];
    let mut rows = Vec::new();
    for p in ["chase:5", "lw:32", "mcoc:32:5.5", "restricted:6:3", "lw:42", "mcoc:42:5.5"] {
        let mut pairs = base.to_vec();
        pairs.push(("patterns", p));
        rows.extend(run(&config(&pairs)).unwrap());
    }
    assert!(ler_at(&rows, "mcoc:32:5.5") <= ler_at(&rows, "lw:32"));
    assert!(ler_at(&rows, "lw:32") <= ler_at(&rows, "chase:5"));
    assert!(ler_at(&rows, "mcoc:42:5.5") <= ler_at(&rows, "lw:42"));
    assert!(ler_at(&rows, "lw:42") <= ler_at(&rows, "restricted:6:3"));
}

#[test]
fn pattern_files_feed_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let fits = dir.path().join("fits.txt");
    let too_long = dir.path().join("long.txt");
    std::fs::write(&fits, gen_lw(31, 10).to_text()).unwrap();
    std::fs::write(&too_long, gen_lw(40, 10).to_text()).unwrap();
    let cfg = |patterns: &str| config(&[("code", "5,1,0"), ("patterns", patterns), ("snr-db", "4"), ("method", "cov")]);
    let from_file = run(&cfg(&fits.display().to_string())).unwrap();
    let direct = run(&cfg("lw:10")).unwrap();
    assert_eq!(from_file[0].ler, direct[0].ler);
    assert!(run(&cfg(&too_long.display().to_string())).is_err());
}
