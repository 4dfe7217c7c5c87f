//! Sliding-window backtest of the maximum-entropy-production prediction
//! rule, with chance thresholds and cohort aggregation.
//!
//! For a series of `N` symbols and window length `μ`, the engine predicts
//! the symbol at every position `t+1` from the `μ+1` preceding symbols
//! `{r_{t-μ}, …, r_t}`, which yields `N−μ−1` scored positions. The hit
//! rate `Ψ(μ)` divides by the scored-position count by default; the
//! `N−μ` window-count denominator is available as a config option.
//!
//! Stock × μ work items are independent and run on a worker pool;
//! aggregation is an order-insensitive reduction, so reported numbers do
//! not depend on worker count or input order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretizer::SymbolSeries;
use crate::entropy::lz_entropy_rate;
use crate::error::{Error, Result};
use crate::predictor::SlicePredictor;

/// How a tied argmax is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieCreditMode {
    /// The smallest tied symbol is the prediction and scores like any
    /// other prediction (default).
    FirstSymbol,
    /// A tie scores `1/|tied set|` when the realized symbol is tied;
    /// sensitivity mode.
    Fractional,
}

/// Denominator of `Ψ(μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiDenominator {
    /// Number of scored positions, `N−μ−1` (default).
    ScoredPositions,
    /// Window count `N−μ`, matching the adjusted-threshold convention.
    WindowCount,
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestConfig {
    /// Window lengths to sweep; sorted and deduplicated before use.
    pub mu_grid: Vec<usize>,
    pub omega: u32,
    pub tie_credit_mode: TieCreditMode,
    pub psi_denominator: PsiDenominator,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            mu_grid: (20..=100).step_by(10).collect(),
            omega: 4,
            tie_credit_mode: TieCreditMode::FirstSymbol,
            psi_denominator: PsiDenominator::ScoredPositions,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu_grid.is_empty() {
            return Err(Error::InvalidConfig {
                reason: "mu grid must not be empty".to_string(),
            });
        }
        if let Some(&mu) = self.mu_grid.iter().find(|&&mu| mu < 2) {
            return Err(Error::InvalidConfig {
                reason: format!("window length must be at least 2, got {mu}"),
            });
        }
        if self.omega < 2 {
            return Err(Error::AlphabetTooSmall { omega: self.omega });
        }
        Ok(())
    }

    fn normalized_grid(&self) -> Vec<usize> {
        let mut grid = self.mu_grid.clone();
        grid.sort_unstable();
        grid.dedup();
        grid
    }
}

/// Per-stock backtest outcome across the window grid.
#[derive(Debug, Clone, Serialize)]
pub struct StockBacktest {
    pub instrument_id: String,
    /// Length of the backtested symbol series.
    pub n: usize,
    pub psi_by_mu: BTreeMap<usize, f64>,
    /// Unweighted mean of the per-μ hit rates.
    pub psi_mean: f64,
    /// Population standard deviation of the per-μ hit rates.
    pub psi_std: f64,
    /// Entropy-rate estimate of the full series, bits per symbol.
    pub whole_series_h: f64,
    /// Fraction of scored predictions with a tied argmax.
    pub tie_rate: f64,
    /// Symbol occupancy diagnostic; unbalanced bins point at heavily
    /// tied returns in the discretization step.
    pub symbol_counts: Vec<u64>,
}

/// Chance levels the hit rates are compared against.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSpec {
    /// `1/Ω`.
    pub unadjusted: f64,
    /// `(N/Ω)/(N−μ)` per window length, with `N` the cohort-average
    /// series length.
    pub adjusted_by_mu: BTreeMap<usize, f64>,
}

/// Stocks scoring below a threshold: summary over the μ grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BelowCounts {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BelowThresholdSummary {
    pub unadjusted: BelowCounts,
    pub adjusted: BelowCounts,
}

/// Cross-stock aggregate at one window length.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuAggregate {
    pub mean_psi: f64,
    pub std_psi: f64,
    pub adjusted_threshold: f64,
    pub below_unadjusted: usize,
    pub below_adjusted: usize,
}

/// Histogram of per-stock mean hit rates over fixed-width bins of [0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct PsiHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl PsiHistogram {
    const BINS: usize = 20;

    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut counts = vec![0u64; Self::BINS];
        for v in values {
            let idx = ((v * Self::BINS as f64).floor() as usize).min(Self::BINS - 1);
            counts[idx] += 1;
        }
        PsiHistogram {
            bin_width: 1.0 / Self::BINS as f64,
            counts,
        }
    }

    /// Bin edges `(lo, hi)` aligned with `counts`.
    pub fn edges(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.counts.len()).map(move |k| {
            (k as f64 * self.bin_width, (k + 1) as f64 * self.bin_width)
        })
    }
}

/// Cohort-level report: per-stock results plus aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct CohortReport {
    pub omega: u32,
    pub mu_grid: Vec<usize>,
    /// Average symbol-series length over the cohort.
    pub n_avg: f64,
    /// Mean over stocks of the per-stock mean hit rate.
    pub mean_psi: f64,
    /// Population standard deviation over stocks of the mean hit rate.
    pub std_psi: f64,
    /// Pearson correlation between per-stock mean hit rate and
    /// whole-series entropy rate; absent when undefined (fewer than two
    /// stocks or constant inputs).
    pub pearson_psi_vs_h: Option<f64>,
    pub thresholds: ThresholdSpec,
    pub below_threshold_counts: BelowThresholdSummary,
    pub per_mu: BTreeMap<usize, MuAggregate>,
    pub psi_histogram: PsiHistogram,
    pub per_stock: Vec<StockBacktest>,
}

/// Chance level for guessing one of `Ω` states: `1/Ω`.
pub fn unadjusted_threshold(omega: u32) -> Result<f64> {
    if omega < 2 {
        return Err(Error::AlphabetTooSmall { omega });
    }
    Ok(1.0 / f64::from(omega))
}

/// Chance level corrected for global discretization:
/// `(n_avg/Ω)/(n_avg−μ)`. Grows with `μ` and equals `1/Ω` at `μ = 0`.
pub fn adjusted_threshold(n_avg: f64, omega: u32, mu: usize) -> Result<f64> {
    if omega < 2 {
        return Err(Error::AlphabetTooSmall { omega });
    }
    if n_avg.is_nan() || n_avg <= mu as f64 {
        return Err(Error::ThresholdDomain { n_avg, mu });
    }
    Ok((n_avg / f64::from(omega)) / (n_avg - mu as f64))
}

/// Sample Pearson correlation coefficient.
///
/// Errors on length mismatch, fewer than two points, or constant input
/// rather than silently returning 0.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::CorrelationLength {
            x_len: x.len(),
            y_len: y.len(),
        });
    }
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xv, &yv) in x.iter().zip(y) {
        let dx = xv - mean_x;
        let dy = yv - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ConstantInput { which: "x" });
    }
    if syy == 0.0 {
        return Err(Error::ConstantInput { which: "y" });
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

struct MuScore {
    mu: usize,
    credit: f64,
    ties: u64,
    scored: u64,
}

fn score_mu(
    symbols: &[u32],
    omega: u32,
    mu: usize,
    mode: TieCreditMode,
    predictor: &mut SlicePredictor,
) -> MuScore {
    let n = symbols.len();
    let mut credit = 0.0f64;
    let mut ties = 0u64;
    let mut scored = 0u64;
    for target in (mu + 1)..n {
        let window = &symbols[target - mu - 1..target];
        let outcome = predictor.predict(window, omega);
        let actual = symbols[target];
        scored += 1;
        if outcome.tie_count > 1 {
            ties += 1;
        }
        match mode {
            TieCreditMode::FirstSymbol => {
                if outcome.predicted == actual {
                    credit += 1.0;
                }
            }
            TieCreditMode::Fractional => {
                if outcome.lambda_sums[actual as usize - 1] == outcome.min_sum {
                    credit += 1.0 / f64::from(outcome.tie_count);
                }
            }
        }
    }
    MuScore {
        mu,
        credit,
        ties,
        scored,
    }
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Runs the window sweep for one symbol series.
///
/// Requires the series to exceed the largest window by at least two
/// symbols so every window scores at least one prediction.
pub fn run_stock_backtest(
    series: &SymbolSeries,
    config: &BacktestConfig,
) -> Result<StockBacktest> {
    config.validate()?;
    if series.omega() != config.omega {
        return Err(Error::AlphabetMismatch {
            series_omega: series.omega(),
            config_omega: config.omega,
        });
    }
    let grid = config.normalized_grid();
    let max_mu = *grid.last().expect("grid validated non-empty");
    let n = series.len();
    if n < max_mu + 2 {
        return Err(Error::SeriesTooShort {
            instrument_id: series.instrument_id().to_string(),
            len: n,
            min: max_mu + 2,
            what: "backtest window sweep",
        });
    }

    let symbols = series.symbols();
    let omega = series.omega();
    let mode = config.tie_credit_mode;
    let scores: Vec<MuScore> = grid
        .par_iter()
        .map_init(SlicePredictor::new, |predictor, &mu| {
            score_mu(symbols, omega, mu, mode, predictor)
        })
        .collect();

    let mut psi_by_mu = BTreeMap::new();
    let mut total_ties = 0u64;
    let mut total_scored = 0u64;
    for score in &scores {
        let denominator = match config.psi_denominator {
            PsiDenominator::ScoredPositions => score.scored as f64,
            PsiDenominator::WindowCount => (n - score.mu) as f64,
        };
        psi_by_mu.insert(score.mu, score.credit / denominator);
        total_ties += score.ties;
        total_scored += score.scored;
    }

    let psi_values: Vec<f64> = psi_by_mu.values().copied().collect();
    let psi_mean = psi_values.iter().sum::<f64>() / psi_values.len() as f64;
    let psi_std = population_std(&psi_values, psi_mean);

    let mut symbol_counts = vec![0u64; omega as usize];
    for &s in symbols {
        symbol_counts[s as usize - 1] += 1;
    }

    Ok(StockBacktest {
        instrument_id: series.instrument_id().to_string(),
        n,
        psi_by_mu,
        psi_mean,
        psi_std,
        whole_series_h: lz_entropy_rate(series)?.h_hat,
        tie_rate: total_ties as f64 / total_scored as f64,
        symbol_counts,
    })
}

/// Backtests a whole cohort in parallel and aggregates the report.
pub fn run_cohort(
    cohort: &[SymbolSeries],
    config: &BacktestConfig,
) -> Result<CohortReport> {
    let stocks: Vec<StockBacktest> = cohort
        .par_iter()
        .map(|series| run_stock_backtest(series, config))
        .collect::<Result<_>>()?;
    cohort_report(&stocks, config)
}

/// Aggregates per-stock backtests: cohort means, per-μ aggregates,
/// below-threshold counts, the Ψ-vs-entropy correlation, and the Ψ
/// histogram. Stocks are reported sorted by instrument id.
pub fn cohort_report(
    stocks: &[StockBacktest],
    config: &BacktestConfig,
) -> Result<CohortReport> {
    config.validate()?;
    if stocks.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let mut per_stock: Vec<StockBacktest> = stocks.to_vec();
    per_stock.sort_by(|a, b| a.instrument_id.cmp(&b.instrument_id));

    let grid = config.normalized_grid();
    for stock in &per_stock {
        for &mu in &grid {
            if !stock.psi_by_mu.contains_key(&mu) {
                return Err(Error::InvalidConfig {
                    reason: format!(
                        "stock `{}` has no result for mu {mu}",
                        stock.instrument_id
                    ),
                });
            }
        }
    }

    let n_avg =
        per_stock.iter().map(|s| s.n as f64).sum::<f64>() / per_stock.len() as f64;
    let unadjusted = unadjusted_threshold(config.omega)?;

    let mut adjusted_by_mu = BTreeMap::new();
    let mut per_mu = BTreeMap::new();
    let mut below_unadj = Vec::with_capacity(grid.len());
    let mut below_adj = Vec::with_capacity(grid.len());
    for &mu in &grid {
        let adjusted = adjusted_threshold(n_avg, config.omega, mu)?;
        let psis: Vec<f64> = per_stock.iter().map(|s| s.psi_by_mu[&mu]).collect();
        let mean = psis.iter().sum::<f64>() / psis.len() as f64;
        let std = population_std(&psis, mean);
        let below_u = psis.iter().filter(|&&p| p < unadjusted).count();
        let below_a = psis.iter().filter(|&&p| p < adjusted).count();
        below_unadj.push(below_u);
        below_adj.push(below_a);
        adjusted_by_mu.insert(mu, adjusted);
        per_mu.insert(
            mu,
            MuAggregate {
                mean_psi: mean,
                std_psi: std,
                adjusted_threshold: adjusted,
                below_unadjusted: below_u,
                below_adjusted: below_a,
            },
        );
    }

    let summarize = |counts: &[usize]| BelowCounts {
        mean: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
    };

    let psi_means: Vec<f64> = per_stock.iter().map(|s| s.psi_mean).collect();
    let entropies: Vec<f64> = per_stock.iter().map(|s| s.whole_series_h).collect();
    let mean_psi = psi_means.iter().sum::<f64>() / psi_means.len() as f64;
    let std_psi = population_std(&psi_means, mean_psi);
    let pearson_psi_vs_h = match pearson_correlation(&psi_means, &entropies) {
        Ok(r) => Some(r),
        Err(Error::ConstantInput { .. }) | Err(Error::CorrelationLength { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(CohortReport {
        omega: config.omega,
        mu_grid: grid,
        n_avg,
        mean_psi,
        std_psi,
        pearson_psi_vs_h,
        thresholds: ThresholdSpec {
            unadjusted,
            adjusted_by_mu,
        },
        below_threshold_counts: BelowThresholdSummary {
            unadjusted: summarize(&below_unadj),
            adjusted: summarize(&below_adj),
        },
        per_mu,
        psi_histogram: PsiHistogram::from_values(psi_means.iter().copied()),
        per_stock,
    })
}

/// IID uniform symbols from a seeded generator; the null control.
pub fn generate_iid_series(n: usize, omega: u32, seed: u64) -> Result<SymbolSeries> {
    if n < 1 {
        return Err(Error::InvalidGenerator {
            reason: "iid series length must be at least 1".to_string(),
        });
    }
    if omega < 2 {
        return Err(Error::AlphabetTooSmall { omega });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = (0..n).map(|_| rng.random_range(1..=omega)).collect();
    SymbolSeries::new(format!("iid-{seed}"), symbols, omega)
}

/// Series that follows the maximum-entropy-production path by
/// construction; the positive control.
///
/// The first `warmup` symbols are IID uniform; every later symbol is the
/// prediction over the trailing `warmup` symbols with the smallest-index
/// tie rule. A backtest with window length `warmup − 1` (whose windows
/// span exactly `warmup` symbols) therefore scores every position as a
/// hit.
pub fn generate_mepp_series(
    n: usize,
    omega: u32,
    seed: u64,
    warmup: usize,
) -> Result<SymbolSeries> {
    if warmup < 2 {
        return Err(Error::InvalidGenerator {
            reason: format!("warmup must be at least 2, got {warmup}"),
        });
    }
    if n <= warmup {
        return Err(Error::InvalidGenerator {
            reason: format!("series length {n} must exceed warmup {warmup}"),
        });
    }
    if omega < 2 {
        return Err(Error::AlphabetTooSmall { omega });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols: Vec<u32> = (0..warmup).map(|_| rng.random_range(1..=omega)).collect();
    let mut predictor = SlicePredictor::new();
    while symbols.len() < n {
        let start = symbols.len() - warmup;
        let outcome = predictor.predict(&symbols[start..], omega);
        symbols.push(outcome.predicted);
    }
    SymbolSeries::new(format!("mepp-{seed}"), symbols, omega)
}
