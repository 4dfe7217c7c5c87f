//! Acceptance suite: every release-gating property of the toolkit, one
//! test per criterion, each printing a PASS/FAIL line (visible with
//! `cargo test -p mepp-cli --test acceptance -- --nocapture`).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use mepp_cli::config::{InputKind, Mode, OutputFormat, RunConfig};
use mepp_cli::pipeline::run_pipeline;
use mepp_cli::synth::{write_fixture, SynthKind, SynthSpec};
use mepp_core::backtest::{
    adjusted_threshold, generate_iid_series, generate_mepp_series, pearson_correlation,
    run_cohort, run_stock_backtest, unadjusted_threshold, BacktestConfig, PsiDenominator,
    TieCreditMode,
};
use mepp_core::discretizer::{discretize, quantile_thresholds, DiscretizationSpec};
use mepp_core::entropy::{lz76_parse, lz_entropy_rate, match_lengths};
use mepp_core::market_data::{LogReturnSeries, ReturnSpec};
use mepp_core::reference::brute_force_match_lengths;
use mepp_core::{Error, SymbolSeries};

fn criterion(name: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{name} failed: {detail}");
}

fn backtest_config(mu_grid: Vec<usize>) -> BacktestConfig {
    BacktestConfig {
        mu_grid,
        omega: 4,
        tie_credit_mode: TieCreditMode::FirstSymbol,
        psi_denominator: PsiDenominator::ScoredPositions,
    }
}

#[test]
fn criterion_01_lz76_pattern_count_and_parse() {
    // 101001010010111110 mapped onto {1, 2} with 0 -> 1, 1 -> 2.
    let symbols: Vec<u32> = "101001010010111110"
        .chars()
        .map(|c| if c == '1' { 2 } else { 1 })
        .collect();
    let series = SymbolSeries::new("textbook", symbols, 2).unwrap();
    let parse = lz76_parse(&series).unwrap();
    let expected: Vec<Vec<u32>> = [
        "1", "0", "10", "01", "010", "0101", "11", "110",
    ]
    .iter()
    .map(|phrase| {
        phrase
            .chars()
            .map(|c| if c == '1' { 2u32 } else { 1 })
            .collect()
    })
    .collect();
    criterion(
        "C1 lz76-pattern-count",
        parse.len() == 8 && parse == expected,
        &format!("count {} parse {:?}", parse.len(), parse),
    );
}

#[test]
fn criterion_02_match_length_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(2..=200usize);
        let omega = [2u32, 3, 4, 8][rng.random_range(0..4)];
        let symbols: Vec<u32> = (0..n).map(|_| rng.random_range(1..=omega)).collect();
        let series = SymbolSeries::new("case", symbols.clone(), omega).unwrap();
        if match_lengths(&series).unwrap() != brute_force_match_lengths(&symbols) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    criterion(
        "C2 match-length-oracle",
        mismatches == 0 && elapsed < Duration::from_secs(30),
        &format!("{mismatches} mismatches over 1000 series in {elapsed:?}"),
    );
}

#[test]
fn criterion_03_estimator_consistency() {
    let start = Instant::now();
    let mean_h = |omega: u32, seed_base: u64| -> f64 {
        let mut total = 0.0;
        for seed in 0..50u64 {
            let series = generate_iid_series(10_000, omega, seed_base + seed).unwrap();
            total += lz_entropy_rate(&series).unwrap().h_hat;
        }
        total / 50.0
    };
    let h4 = mean_h(4, 10_000);
    let h2 = mean_h(2, 20_000);
    let elapsed = start.elapsed();
    criterion(
        "C3 estimator-consistency",
        (1.8..=2.2).contains(&h4)
            && (0.9..=1.1).contains(&h2)
            && elapsed < Duration::from_secs(60),
        &format!("mean Ĥ omega=4: {h4:.4}, omega=2: {h2:.4}, {elapsed:?}"),
    );
}

#[test]
fn criterion_04_null_control() {
    let start = Instant::now();
    let cohort: Vec<SymbolSeries> = (0..50)
        .map(|seed| generate_iid_series(5000, 4, 40_000 + seed).unwrap())
        .collect();
    let report = run_cohort(&cohort, &backtest_config((20..=100).step_by(10).collect()))
        .unwrap();
    let elapsed = start.elapsed();
    criterion(
        "C4 null-control",
        (0.23..=0.27).contains(&report.mean_psi) && elapsed < Duration::from_secs(300),
        &format!("cohort mean psi {:.4} in {elapsed:?}", report.mean_psi),
    );
}

#[test]
fn criterion_05_positive_control() {
    let start = Instant::now();
    let mut grid: Vec<usize> = (20..=100).step_by(10).collect();
    grid.push(20); // tenth series repeats the smallest window
    let mut failures = Vec::new();
    for (idx, &mu) in grid.iter().enumerate() {
        let series = generate_mepp_series(5000, 4, 50_000 + idx as u64, mu + 1).unwrap();
        let result = run_stock_backtest(&series, &backtest_config(vec![mu])).unwrap();
        let psi = result.psi_by_mu[&mu];
        if psi != 1.0 {
            failures.push(format!("mu {mu}: psi {psi}"));
        }
    }
    let elapsed = start.elapsed();
    criterion(
        "C5 positive-control",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        &format!("10 matched series in {elapsed:?}; failures: {failures:?}"),
    );
}

#[test]
fn criterion_06_threshold_formulas() {
    let value = adjusted_threshold(1000.0, 4, 100).unwrap();
    let exact_to_ten_places = (value - 0.2777777777777778).abs() < 1e-10;

    let unadjusted = unadjusted_threshold(4).unwrap();
    let equal_at_zero = adjusted_threshold(1000.0, 4, 0).unwrap() == unadjusted;
    let dominates_on_grid = (20..=100).step_by(10).all(|mu| {
        adjusted_threshold(1000.0, 4, mu).unwrap() > unadjusted
    });
    criterion(
        "C6 threshold-formulas",
        exact_to_ten_places && equal_at_zero && dominates_on_grid,
        &format!("adjusted(1000,4,100) = {value:.12}"),
    );
}

#[test]
fn criterion_07_discretization_balance() {
    // Distinct values in scrambled order: multiples of a unit stepped
    // through a full-cycle permutation.
    let n = 10_000usize;
    let values: Vec<f64> = (0..n)
        .map(|i| ((i * 7919) % n) as f64 * 1e-4 - 0.5)
        .collect();
    let returns = LogReturnSeries::from_values("balance", values, ReturnSpec::default());
    let spec = DiscretizationSpec::new(4).unwrap();
    let thresholds = quantile_thresholds(&returns, &spec).unwrap();
    let series = discretize(&returns, &thresholds).unwrap();
    let mut counts = [0u64; 4];
    for &s in series.symbols() {
        counts[s as usize - 1] += 1;
    }
    let balanced = counts == [2500, 2500, 2500, 2500];

    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut monotone = true;
    let mut transform_invariant = true;
    for _ in 0..100 {
        let len = rng.random_range(8..200usize);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(-0.1..0.1)).collect();
        let returns = LogReturnSeries::from_values("r", values.clone(), ReturnSpec::default());
        let thresholds = quantile_thresholds(&returns, &spec).unwrap();
        let symbols = discretize(&returns, &thresholds).unwrap();

        let mut pairs: Vec<(f64, u32)> = values
            .iter()
            .copied()
            .zip(symbols.symbols().iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        monotone &= pairs.windows(2).all(|w| w[0].1 <= w[1].1);

        // tanh is strictly increasing; thresholds recomputed on the
        // transformed values must reproduce the symbols exactly.
        let transformed: Vec<f64> = values.iter().map(|v| v.tanh()).collect();
        let t_returns =
            LogReturnSeries::from_values("t", transformed, ReturnSpec::default());
        let t_thresholds = quantile_thresholds(&t_returns, &spec).unwrap();
        let t_symbols = discretize(&t_returns, &t_thresholds).unwrap();
        transform_invariant &= t_symbols.symbols() == symbols.symbols();
    }
    criterion(
        "C7 discretization-balance",
        balanced && monotone && transform_invariant,
        &format!(
            "counts {counts:?}, monotone {monotone}, transform-invariant {transform_invariant}"
        ),
    );
}

#[test]
fn criterion_08_pearson() {
    let linear = pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
    let anti = pearson_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
    let hand = pearson_correlation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    let constant_errors = matches!(
        pearson_correlation(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]),
        Err(Error::ConstantInput { .. })
    );
    criterion(
        "C8 pearson",
        (linear - 1.0).abs() <= 1e-12
            && (anti + 1.0).abs() <= 1e-12
            && (hand - 0.8).abs() <= 1e-12
            && constant_errors,
        &format!("r_lin {linear}, r_anti {anti}, r_hand {hand}, constant errors {constant_errors}"),
    );
}

fn fixture_run_config(input_dir: &Path, output_dir: &Path, threads: Option<usize>) -> RunConfig {
    RunConfig {
        input_dir: input_dir.to_path_buf(),
        input_kind: InputKind::Prices,
        mode: Mode::Daily,
        omega: 4,
        mu_min: 20,
        mu_max: 100,
        mu_step: 10,
        tau: 1,
        seed: 2024,
        output_dir: output_dir.to_path_buf(),
        format: OutputFormat::Both,
        strict: false,
        timestamp_column: "timestamp".to_string(),
        price_column: "close".to_string(),
        drop_zero_returns: None,
        tie_credit_mode: TieCreditMode::FirstSymbol,
        psi_denominator: PsiDenominator::ScoredPositions,
        threads,
    }
}

const ARTIFACTS: [&str; 7] = [
    "per_stock.csv",
    "psi_histogram.csv",
    "psi_vs_mu.csv",
    "psi_vs_entropy.csv",
    "psi_vs_length.csv",
    "cohort.json",
    "manifest.json",
];

fn read_artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ARTIFACTS
        .iter()
        .map(|name| (name.to_string(), fs::read(dir.join(name)).unwrap()))
        .collect()
}

fn write_iid_fixture(dir: &Path) -> Vec<PathBuf> {
    write_fixture(&SynthSpec {
        kind: SynthKind::Iid,
        count: 10,
        n: 5000,
        omega: 4,
        seed: 2024,
        warmup: 21,
        out_dir: dir.to_path_buf(),
    })
    .unwrap()
}

#[test]
fn criterion_09_determinism() {
    let fixture = TempDir::new().unwrap();
    write_iid_fixture(fixture.path());
    let out = TempDir::new().unwrap();

    let mut snapshots: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for threads in [Some(1), Some(4), Some(4)] {
        for name in ARTIFACTS {
            let _ = fs::remove_file(out.path().join(name));
        }
        let config = fixture_run_config(fixture.path(), out.path(), threads);
        run_pipeline(&config).unwrap();
        snapshots.push(read_artifacts(out.path()));
    }
    let identical = snapshots.windows(2).all(|pair| pair[0] == pair[1]);
    criterion(
        "C9 determinism",
        identical,
        "3 runs, worker counts {1,4,4}, 7 artifacts compared byte-wise",
    );
}

#[test]
fn criterion_10_performance() {
    let series = generate_iid_series(1_000_000, 4, 99).unwrap();
    let t0 = Instant::now();
    let estimate = lz_entropy_rate(&series).unwrap();
    let entropy_elapsed = t0.elapsed();

    let fixture = TempDir::new().unwrap();
    write_iid_fixture(fixture.path());
    let out = TempDir::new().unwrap();
    let config = fixture_run_config(fixture.path(), out.path(), None);
    let t1 = Instant::now();
    let outcome = run_pipeline(&config).unwrap();
    let backtest_elapsed = t1.elapsed();

    criterion(
        "C10 performance",
        entropy_elapsed <= Duration::from_secs(10)
            && backtest_elapsed <= Duration::from_secs(120)
            && outcome.report.per_stock.len() == 10,
        &format!(
            "n=1e6 entropy {entropy_elapsed:?} (Ĥ {:.3}), 10x9x5000 backtest {backtest_elapsed:?}",
            estimate.h_hat
        ),
    );
}
