//! Report artifact serialization.
//!
//! CSV artifacts round numbers to 6 significant digits for human eyes;
//! the cohort JSON keeps full double precision as the machine record.
//! Every writer produces a deterministic byte stream for a given report.

use mepp_core::backtest::CohortReport;
use sha2::{Digest, Sha256};

/// Artifact file names; fixed so manifests stay comparable across runs.
pub const PER_STOCK_CSV: &str = "per_stock.csv";
pub const COHORT_JSON: &str = "cohort.json";
pub const PSI_HISTOGRAM_CSV: &str = "psi_histogram.csv";
pub const PSI_VS_MU_CSV: &str = "psi_vs_mu.csv";
pub const PSI_VS_ENTROPY_CSV: &str = "psi_vs_entropy.csv";
pub const PSI_VS_LENGTH_CSV: &str = "psi_vs_length.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Formats with the given number of significant digits, fixed-point.
pub fn fmt_sig(value: f64, digits: u32) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}

fn sig6(value: f64) -> String {
    fmt_sig(value, 6)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).expect("in-memory CSV write");
    }
    writer.into_inner().expect("in-memory CSV flush")
}

/// One row per (stock, μ): `instrument_id,n,mu,psi,whole_series_h,tie_rate`.
pub fn per_stock_csv(report: &CohortReport) -> Vec<u8> {
    let mut rows = vec![vec![
        "instrument_id".to_string(),
        "n".to_string(),
        "mu".to_string(),
        "psi".to_string(),
        "whole_series_h".to_string(),
        "tie_rate".to_string(),
    ]];
    for stock in &report.per_stock {
        for (&mu, &psi) in &stock.psi_by_mu {
            rows.push(vec![
                stock.instrument_id.clone(),
                stock.n.to_string(),
                mu.to_string(),
                sig6(psi),
                sig6(stock.whole_series_h),
                sig6(stock.tie_rate),
            ]);
        }
    }
    csv_bytes(rows)
}

/// Full-precision machine record of the cohort report.
pub fn cohort_json(report: &CohortReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serialization");
    bytes.push(b'\n');
    bytes
}

/// Histogram of per-stock mean hit rates, with the chance levels repeated
/// per row so the file plots standalone.
pub fn psi_histogram_csv(report: &CohortReport) -> Vec<u8> {
    let adjusted_mean = mean(report.thresholds.adjusted_by_mu.values().copied());
    let mut rows = vec![vec![
        "bin_lo".to_string(),
        "bin_hi".to_string(),
        "count".to_string(),
        "threshold_unadjusted".to_string(),
        "threshold_adjusted_mean".to_string(),
    ]];
    for ((lo, hi), &count) in report
        .psi_histogram
        .edges()
        .zip(report.psi_histogram.counts.iter())
    {
        rows.push(vec![
            sig6(lo),
            sig6(hi),
            count.to_string(),
            sig6(report.thresholds.unadjusted),
            sig6(adjusted_mean),
        ]);
    }
    csv_bytes(rows)
}

/// Mean hit rate vs window length with error bars and both chance levels.
pub fn psi_vs_mu_csv(report: &CohortReport) -> Vec<u8> {
    let mut rows = vec![vec![
        "mu".to_string(),
        "mean_psi".to_string(),
        "std_psi".to_string(),
        "threshold_unadjusted".to_string(),
        "threshold_adjusted".to_string(),
    ]];
    for (&mu, aggregate) in &report.per_mu {
        rows.push(vec![
            mu.to_string(),
            sig6(aggregate.mean_psi),
            sig6(aggregate.std_psi),
            sig6(report.thresholds.unadjusted),
            sig6(aggregate.adjusted_threshold),
        ]);
    }
    csv_bytes(rows)
}

/// Scatter of mean hit rate vs whole-series entropy rate, with the
/// least-squares fit repeated per row. Fit fields stay empty when the
/// entropies are constant.
pub fn psi_vs_entropy_csv(report: &CohortReport) -> Vec<u8> {
    let xs: Vec<f64> = report.per_stock.iter().map(|s| s.whole_series_h).collect();
    let ys: Vec<f64> = report.per_stock.iter().map(|s| s.psi_mean).collect();
    let fit = least_squares(&xs, &ys);
    let (slope, intercept) = match fit {
        Some((a, b)) => (sig6(a), sig6(b)),
        None => (String::new(), String::new()),
    };
    let mut rows = vec![vec![
        "instrument_id".to_string(),
        "whole_series_h".to_string(),
        "psi_mean".to_string(),
        "fit_slope".to_string(),
        "fit_intercept".to_string(),
    ]];
    for stock in &report.per_stock {
        rows.push(vec![
            stock.instrument_id.clone(),
            sig6(stock.whole_series_h),
            sig6(stock.psi_mean),
            slope.clone(),
            intercept.clone(),
        ]);
    }
    csv_bytes(rows)
}

/// Scatter of mean hit rate vs series length.
pub fn psi_vs_length_csv(report: &CohortReport) -> Vec<u8> {
    let mut rows = vec![vec![
        "instrument_id".to_string(),
        "n".to_string(),
        "psi_mean".to_string(),
    ]];
    for stock in &report.per_stock {
        rows.push(vec![
            stock.instrument_id.clone(),
            stock.n.to_string(),
            sig6(stock.psi_mean),
        ]);
    }
    csv_bytes(rows)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    sum / count as f64
}

/// Ordinary least squares `y = slope·x + intercept`; `None` when x is
/// constant.
fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}
