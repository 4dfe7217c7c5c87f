//! Entropy-rate estimation and maximum-entropy-production backtesting for
//! discretized stock-return series.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`market_data`] ingests price CSVs and turns them into log-return
//!    series at a configurable sampling horizon.
//! 2. [`discretizer`] maps real-valued returns onto a small alphabet
//!    `{1..Ω}` by empirical quantile binning over the whole series.
//! 3. [`entropy`] estimates the Shannon entropy rate of a symbol series
//!    with a Lempel–Ziv match-length estimator, and [`predictor`] turns
//!    that estimator into a one-step-ahead forecast: the next state is
//!    the one whose appended extension maximizes the entropy-rate
//!    estimate.
//! 4. [`backtest`] slides a window through each series, scores the
//!    predictions against realized states, and aggregates hit rates,
//!    chance thresholds, and correlations across a cohort of stocks.

pub mod backtest;
pub mod discretizer;
pub mod entropy;
pub mod error;
pub mod market_data;
pub mod predictor;
pub mod reference;

mod sam;

pub use discretizer::{DiscretizationSpec, SymbolSeries, Thresholds};
pub use entropy::{EntropyEstimate, HistogramCounts};
pub use error::{Error, Result};
pub use market_data::{CsvLayout, LogReturnSeries, PriceSeries, ReturnSpec};
pub use predictor::Prediction;
