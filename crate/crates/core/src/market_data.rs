//! Price ingestion and log-return computation.
//!
//! Prices arrive as one CSV per instrument with a header row, a
//! timestamp column and a price column (defaults `timestamp` / `close`).
//! The sampling horizon `tau` counts rows, not wall-clock units, so the
//! same code serves end-of-day files and tick or bar data alike; each row
//! is one sampling step.

use std::path::Path;

use crate::error::{Error, Result};

/// Timestamped raw prices for one instrument.
///
/// Timestamps are strictly increasing, every price is positive, and at
/// least two observations are present.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    instrument_id: String,
    timestamps: Vec<i64>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(
        instrument_id: impl Into<String>,
        observations: Vec<(i64, f64)>,
    ) -> Result<Self> {
        let instrument_id = instrument_id.into();
        if observations.len() < 2 {
            return Err(Error::TooFewObservations {
                instrument_id,
                len: observations.len(),
                min: 2,
            });
        }
        let mut timestamps = Vec::with_capacity(observations.len());
        let mut prices = Vec::with_capacity(observations.len());
        for (row, &(ts, price)) in observations.iter().enumerate() {
            if let Some(&prev) = timestamps.last() {
                if ts <= prev {
                    return Err(Error::NonIncreasingTimestamps {
                        path: instrument_id.clone().into(),
                        row: row as u64 + 1,
                        prev,
                        curr: ts,
                    });
                }
            }
            if !(price.is_finite() && price > 0.0) {
                return Err(Error::NonPositivePrice {
                    path: instrument_id.clone().into(),
                    row: row as u64 + 1,
                    price,
                });
            }
            timestamps.push(ts);
            prices.push(price);
        }
        Ok(PriceSeries {
            instrument_id,
            timestamps,
            prices,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Sampling horizon and zero-return handling for log returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReturnSpec {
    tau: usize,
    drop_zero_returns: bool,
}

impl ReturnSpec {
    pub fn new(tau: usize, drop_zero_returns: bool) -> Result<Self> {
        if tau < 1 {
            return Err(Error::InvalidConfig {
                reason: "tau must be at least 1".to_string(),
            });
        }
        Ok(ReturnSpec {
            tau,
            drop_zero_returns,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn drop_zero_returns(&self) -> bool {
        self.drop_zero_returns
    }
}

impl Default for ReturnSpec {
    fn default() -> Self {
        ReturnSpec {
            tau: 1,
            drop_zero_returns: false,
        }
    }
}

/// Log returns of one instrument at a fixed sampling horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReturnSeries {
    instrument_id: String,
    returns: Vec<f64>,
    spec: ReturnSpec,
}

impl LogReturnSeries {
    /// Wraps pre-computed return values; used by tests and synthetic
    /// pipelines. Ingested data goes through [`compute_log_returns`].
    pub fn from_values(
        instrument_id: impl Into<String>,
        returns: Vec<f64>,
        spec: ReturnSpec,
    ) -> Self {
        LogReturnSeries {
            instrument_id: instrument_id.into(),
            returns,
            spec,
        }
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn values(&self) -> &[f64] {
        &self.returns
    }

    pub fn spec(&self) -> ReturnSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Column layout of a price CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvLayout {
    pub timestamp_column: String,
    pub price_column: String,
    /// Overrides the file stem as instrument id.
    pub instrument_id: Option<String>,
}

impl Default for CsvLayout {
    fn default() -> Self {
        CsvLayout {
            timestamp_column: "timestamp".to_string(),
            price_column: "close".to_string(),
            instrument_id: None,
        }
    }
}

/// Reads one instrument's prices from a CSV file.
///
/// Rows with unparseable fields are rejected with their row number, not
/// skipped. The row numbers in errors are CSV line numbers (the header is
/// line 1).
pub fn load_price_csv(path: &Path, layout: &CsvLayout) -> Result<PriceSeries> {
    let instrument_id = layout.instrument_id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    });

    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                Error::Io {
                    path: path.to_path_buf(),
                    source: io,
                }
            } else {
                unreachable!()
            }
        }
        _ => Error::Csv {
            path: path.to_path_buf(),
            source: Box::new(e),
        },
    })?;

    let headers = reader.headers().map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: Box::new(e),
    })?;
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let ts_idx = find(&layout.timestamp_column)?;
    let price_idx = find(&layout.price_column)?;

    let mut observations: Vec<(i64, f64)> = Vec::new();
    let mut prev_ts: Option<i64> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: Box::new(e),
        })?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);

        let ts_field = record.get(ts_idx).ok_or_else(|| Error::MalformedRow {
            path: path.to_path_buf(),
            row,
            reason: format!("missing field `{}`", layout.timestamp_column),
        })?;
        let ts: i64 = ts_field.trim().parse().map_err(|_| Error::MalformedRow {
            path: path.to_path_buf(),
            row,
            reason: format!("unparseable timestamp `{ts_field}`"),
        })?;

        let price_field = record.get(price_idx).ok_or_else(|| Error::MalformedRow {
            path: path.to_path_buf(),
            row,
            reason: format!("missing field `{}`", layout.price_column),
        })?;
        let price: f64 = price_field
            .trim()
            .parse()
            .map_err(|_| Error::MalformedRow {
                path: path.to_path_buf(),
                row,
                reason: format!("unparseable price `{price_field}`"),
            })?;

        if let Some(prev) = prev_ts {
            if ts <= prev {
                return Err(Error::NonIncreasingTimestamps {
                    path: path.to_path_buf(),
                    row,
                    prev,
                    curr: ts,
                });
            }
        }
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::NonPositivePrice {
                path: path.to_path_buf(),
                row,
                price,
            });
        }

        prev_ts = Some(ts);
        observations.push((ts, price));
    }

    if observations.len() < 2 {
        return Err(Error::TooFewObservations {
            instrument_id,
            len: observations.len(),
            min: 2,
        });
    }
    PriceSeries::new(instrument_id, observations)
}

/// Log returns `ρ_t = ln(p(t)) − ln(p(t−τ))`, evaluated as the log of
/// the price ratio, then optionally stripped of exact zeros.
///
/// A zero return arises exactly from a repeated price, so the filter
/// compares against literal `0.0` with no epsilon.
pub fn compute_log_returns(series: &PriceSeries, spec: ReturnSpec) -> Result<LogReturnSeries> {
    let n = series.len();
    let tau = spec.tau();
    if n <= tau {
        return Err(Error::SeriesTooShort {
            instrument_id: series.instrument_id().to_string(),
            len: n,
            min: tau + 1,
            what: "log returns",
        });
    }
    let prices = series.prices();
    let mut returns: Vec<f64> = (0..n - tau)
        .map(|j| (prices[j + tau] / prices[j]).ln())
        .collect();
    if spec.drop_zero_returns() {
        returns.retain(|&r| r != 0.0);
    }
    Ok(LogReturnSeries::from_values(
        series.instrument_id(),
        returns,
        spec,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::io::Write;
    use tempfile::NamedTempFile;

    fn write_csv(contents: &str) -> NamedTempFile {
        let mut f = NamedTempFile::with_suffix(".csv").unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_simple_file() {
        let f = write_csv("timestamp,close\n1,100.0\n2,105.0\n");
        let series = load_price_csv(f.path(), &CsvLayout::default()).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.timestamps(), &[1, 2]);
        assert_eq!(series.prices(), &[100.0, 105.0]);
    }

    #[test]
    fn rejects_negative_price_with_row() {
        let f = write_csv("timestamp,close\n1,100.0\n2,-1.0\n");
        let err = load_price_csv(f.path(), &CsvLayout::default()).unwrap_err();
        match err {
            Error::NonPositivePrice { row, price, .. } => {
                assert_eq!(row, 3); // header is line 1
                assert_eq!(price, -1.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_timestamp() {
        let f = write_csv("timestamp,close\n1,100.0\n1,101.0\n");
        let err = load_price_csv(f.path(), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::NonIncreasingTimestamps { .. }));
    }

    #[test]
    fn rejects_unparseable_row() {
        let f = write_csv("timestamp,close\n1,100.0\nnot-a-number,101.0\n");
        let err = load_price_csv(f.path(), &CsvLayout::default()).unwrap_err();
        match err {
            Error::MalformedRow { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_column() {
        let f = write_csv("time,close\n1,100.0\n2,105.0\n");
        let err = load_price_csv(f.path(), &CsvLayout::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }));
    }

    #[test]
    fn missing_file_reports_io_error() {
        let err = load_price_csv(Path::new("/nonexistent/x.csv"), &CsvLayout::default())
            .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn custom_layout_and_instrument_id() {
        let f = write_csv("t,p\n1,100.0\n2,105.0\n");
        let layout = CsvLayout {
            timestamp_column: "t".to_string(),
            price_column: "p".to_string(),
            instrument_id: Some("ACME".to_string()),
        };
        let series = load_price_csv(f.path(), &layout).unwrap();
        assert_eq!(series.instrument_id(), "ACME");
    }

    #[test]
    fn single_step_return() {
        let series = PriceSeries::new("x", vec![(1, 100.0), (2, 105.0)]).unwrap();
        let r = compute_log_returns(&series, ReturnSpec::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r.values()[0], 1.05f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn flat_prices_give_exact_zeros() {
        let series =
            PriceSeries::new("x", vec![(1, 100.0), (2, 100.0), (3, 100.0)]).unwrap();
        let r = compute_log_returns(&series, ReturnSpec::new(1, false).unwrap()).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0]);
    }

    #[test]
    fn zero_filter_drops_only_zeros_in_order() {
        let series =
            PriceSeries::new("x", vec![(1, 100.0), (2, 100.0), (3, 110.0)]).unwrap();
        let r = compute_log_returns(&series, ReturnSpec::new(1, true).unwrap()).unwrap();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r.values()[0], 1.1f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn series_must_be_longer_than_tau() {
        let series = PriceSeries::new("x", vec![(1, 100.0), (2, 105.0)]).unwrap();
        assert!(compute_log_returns(&series, ReturnSpec::new(2, false).unwrap()).is_err());
    }

    #[test]
    fn tau_two_spans_two_rows() {
        let series =
            PriceSeries::new("x", vec![(1, 100.0), (2, 50.0), (3, 200.0)]).unwrap();
        let r = compute_log_returns(&series, ReturnSpec::new(2, false).unwrap()).unwrap();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r.values()[0], 2.0f64.ln(), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn output_length_plus_tau_is_input_length(
            prices in proptest::collection::vec(0.5f64..200.0, 3..60),
            tau in 1usize..3,
        ) {
            prop_assume!(prices.len() > tau);
            let obs: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p)).collect();
            let series = PriceSeries::new("x", obs).unwrap();
            let r = compute_log_returns(&series, ReturnSpec::new(tau, false).unwrap()).unwrap();
            prop_assert_eq!(r.len() + tau, series.len());
        }

        #[test]
        fn power_of_two_scaling_is_bit_identical(
            prices in proptest::collection::vec(0.5f64..200.0, 3..40),
            shift in -3i32..4,
        ) {
            let scale = (2.0f64).powi(shift);
            let obs: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p)).collect();
            let scaled: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p * scale)).collect();
            let a = compute_log_returns(&PriceSeries::new("x", obs).unwrap(), ReturnSpec::default()).unwrap();
            let b = compute_log_returns(&PriceSeries::new("x", scaled).unwrap(), ReturnSpec::default()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        #[test]
        fn general_scaling_agrees_closely(
            prices in proptest::collection::vec(0.5f64..200.0, 3..40),
            scale in 0.1f64..10.0,
        ) {
            let obs: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p)).collect();
            let scaled: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p * scale)).collect();
            let a = compute_log_returns(&PriceSeries::new("x", obs).unwrap(), ReturnSpec::default()).unwrap();
            let b = compute_log_returns(&PriceSeries::new("x", scaled).unwrap(), ReturnSpec::default()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn zero_filter_preserves_order_of_nonzeros(
            prices in proptest::collection::vec(0.5f64..200.0, 3..40),
        ) {
            let obs: Vec<(i64, f64)> = prices.iter().enumerate().map(|(i, &p)| (i as i64, p)).collect();
            let series = PriceSeries::new("x", obs).unwrap();
            let unfiltered = compute_log_returns(&series, ReturnSpec::new(1, false).unwrap()).unwrap();
            let filtered = compute_log_returns(&series, ReturnSpec::new(1, true).unwrap()).unwrap();
            let expected: Vec<f64> = unfiltered.values().iter().copied().filter(|&r| r != 0.0).collect();
            prop_assert_eq!(filtered.values(), expected.as_slice());
        }
    }
}
