//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: Box<csv::Error>,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}: {reason}")]
    MalformedRow {
        path: PathBuf,
        row: u64,
        reason: String,
    },

    #[error("{path}: row {row}: non-increasing timestamps ({prev} followed by {curr})")]
    NonIncreasingTimestamps {
        path: PathBuf,
        row: u64,
        prev: i64,
        curr: i64,
    },

    #[error("{path}: row {row}: non-positive price {price}")]
    NonPositivePrice { path: PathBuf, row: u64, price: f64 },

    #[error("price series `{instrument_id}` has {len} observations, need at least {min}")]
    TooFewObservations {
        instrument_id: String,
        len: usize,
        min: usize,
    },

    #[error("series `{instrument_id}` of length {len} is too short: {what} requires at least {min}")]
    SeriesTooShort {
        instrument_id: String,
        len: usize,
        min: usize,
        what: &'static str,
    },

    #[error("alphabet size must be at least 2, got {omega}")]
    AlphabetTooSmall { omega: u32 },

    #[error("symbol {symbol} is outside the alphabet 1..={omega}")]
    SymbolOutOfRange { symbol: u32, omega: u32 },

    #[error("expected {expected} cut points for alphabet size {omega}, got {got}")]
    ThresholdArityMismatch {
        expected: usize,
        omega: u32,
        got: usize,
    },

    #[error("histogram counts must contain at least one non-zero entry")]
    EmptyHistogram,

    #[error("alphabet mismatch: series uses omega {series_omega}, config requests {config_omega}")]
    AlphabetMismatch { series_omega: u32, config_omega: u32 },

    #[error("invalid backtest configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("adjusted threshold requires average length > mu, got n_avg {n_avg} and mu {mu}")]
    ThresholdDomain { n_avg: f64, mu: usize },

    #[error("correlation inputs must have equal length >= 2, got {x_len} and {y_len}")]
    CorrelationLength { x_len: usize, y_len: usize },

    #[error("correlation is undefined for constant input ({which})")]
    ConstantInput { which: &'static str },

    #[error("cohort report requires at least one stock backtest")]
    EmptyCohort,

    #[error("invalid generator parameters: {reason}")]
    InvalidGenerator { reason: String },
}
