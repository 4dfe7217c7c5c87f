//! End-to-end pipeline: discover inputs, process every instrument,
//! aggregate the cohort, and emit artifacts plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use mepp_core::backtest::{cohort_report, run_stock_backtest, CohortReport, StockBacktest};
use mepp_core::discretizer::{discretize, quantile_thresholds, DiscretizationSpec};
use mepp_core::market_data::{compute_log_returns, load_price_csv, CsvLayout, ReturnSpec};
use mepp_core::SymbolSeries;

use crate::config::{InputKind, OutputFormat, RunConfig};
use crate::report;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] mepp_core::Error),

    #[error("failed to {what} {path}: {source}")]
    Io {
        what: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("no valid input files in {dir}")]
    NoValidInputs { dir: PathBuf },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("{path}: row {row}: {reason}")]
    SymbolCsv {
        path: PathBuf,
        row: u64,
        reason: String,
    },

    #[error("strict mode: {} input file(s) failed:\n{}", failures.len(), failures.join("\n"))]
    StrictFailures { failures: Vec<String> },

    #[error("failed to serialize {what}: {source}")]
    Serialize {
        what: &'static str,
        source: serde_json::Error,
    },

    #[error("failed to build worker pool: {0}")]
    PoolBuild(#[from] rayon::ThreadPoolBuildError),
}

/// Exit code the CLI maps this error to.
pub fn exit_code_for(error: &PipelineError) -> u8 {
    match error {
        PipelineError::NoValidInputs { .. } => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputRecord {
    pub file: String,
    pub sha256: String,
    pub status: InputStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

/// Config echo plus input/artifact checksums; everything needed to
/// reproduce the run byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub inputs: Vec<InputRecord>,
    pub artifacts: Vec<ArtifactRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub report: CohortReport,
    pub manifest: Manifest,
}

fn discover_inputs(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = fs::read_dir(dir).map_err(|source| PipelineError::Io {
        what: "read directory",
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Reads an already-discretized series: `timestamp,symbol` with symbols
/// in `1..=omega`.
fn load_symbol_csv(
    path: &Path,
    omega: u32,
) -> Result<SymbolSeries, PipelineError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| PipelineError::SymbolCsv {
        path: path.to_path_buf(),
        row: 0,
        reason: e.to_string(),
    })?;
    let headers = reader.headers().map_err(|e| PipelineError::SymbolCsv {
        path: path.to_path_buf(),
        row: 1,
        reason: e.to_string(),
    })?;
    let ts_idx = headers
        .iter()
        .position(|h| h == "timestamp")
        .ok_or_else(|| PipelineError::SymbolCsv {
            path: path.to_path_buf(),
            row: 1,
            reason: "missing column `timestamp`".to_string(),
        })?;
    let sym_idx = headers
        .iter()
        .position(|h| h == "symbol")
        .ok_or_else(|| PipelineError::SymbolCsv {
            path: path.to_path_buf(),
            row: 1,
            reason: "missing column `symbol`".to_string(),
        })?;

    let mut symbols: Vec<u32> = Vec::new();
    let mut prev_ts: Option<i64> = None;
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::SymbolCsv {
            path: path.to_path_buf(),
            row: 0,
            reason: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let fail = |reason: String| PipelineError::SymbolCsv {
            path: path.to_path_buf(),
            row,
            reason,
        };
        let ts: i64 = record
            .get(ts_idx)
            .ok_or_else(|| fail("missing timestamp field".to_string()))?
            .trim()
            .parse()
            .map_err(|_| fail("unparseable timestamp".to_string()))?;
        if let Some(prev) = prev_ts {
            if ts <= prev {
                return Err(fail(format!(
                    "non-increasing timestamps ({prev} followed by {ts})"
                )));
            }
        }
        prev_ts = Some(ts);
        let symbol: u32 = record
            .get(sym_idx)
            .ok_or_else(|| fail("missing symbol field".to_string()))?
            .trim()
            .parse()
            .map_err(|_| fail("unparseable symbol".to_string()))?;
        symbols.push(symbol);
    }

    let instrument_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    SymbolSeries::new(instrument_id, symbols, omega).map_err(PipelineError::Core)
}

fn process_file(path: &Path, config: &RunConfig) -> Result<StockBacktest, PipelineError> {
    let series = match config.input_kind {
        InputKind::Prices => {
            let layout = CsvLayout {
                timestamp_column: config.timestamp_column.clone(),
                price_column: config.price_column.clone(),
                instrument_id: None,
            };
            let prices = load_price_csv(path, &layout)?;
            let spec = ReturnSpec::new(config.tau, config.drop_zeros())?;
            let returns = compute_log_returns(&prices, spec)?;
            let disc_spec = DiscretizationSpec::new(config.omega)?;
            let thresholds = quantile_thresholds(&returns, &disc_spec)?;
            discretize(&returns, &thresholds)?
        }
        InputKind::Symbols => load_symbol_csv(path, config.omega)?,
    };
    run_stock_backtest(&series, &config.backtest_config()).map_err(PipelineError::Core)
}

fn write_artifact(
    dir: &Path,
    name: &str,
    bytes: &[u8],
) -> Result<ArtifactRecord, PipelineError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| PipelineError::Io {
        what: "write",
        path: path.clone(),
        source,
    })?;
    Ok(ArtifactRecord {
        file: name.to_string(),
        sha256: report::sha256_hex(bytes),
    })
}

/// Runs the whole pipeline and writes all artifacts into
/// `config.output_dir`.
///
/// Per-file failures become manifest warnings and the run continues,
/// unless `strict` is set. A run with zero valid inputs fails with
/// [`PipelineError::NoValidInputs`] (CLI exit code 2).
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutcome, PipelineError> {
    config
        .validate()
        .map_err(|reason| PipelineError::InvalidConfig { reason })?;

    let files = discover_inputs(&config.input_dir)?;
    if files.is_empty() {
        return Err(PipelineError::NoValidInputs {
            dir: config.input_dir.clone(),
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()?;

    let processed: Vec<(PathBuf, String, Result<StockBacktest, PipelineError>)> =
        pool.install(|| {
            files
                .par_iter()
                .map(|path| {
                    let sha = fs::read(path)
                        .map(|bytes| report::sha256_hex(&bytes))
                        .unwrap_or_default();
                    (path.clone(), sha, process_file(path, config))
                })
                .collect()
        });

    let mut inputs = Vec::with_capacity(processed.len());
    let mut warnings = Vec::new();
    let mut stocks = Vec::new();
    for (path, sha256, outcome) in processed {
        let file = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        match outcome {
            Ok(stock) => {
                stocks.push(stock);
                inputs.push(InputRecord {
                    file,
                    sha256,
                    status: InputStatus::Ok,
                    detail: None,
                });
            }
            Err(error) => {
                warnings.push(format!("{file}: {error}"));
                inputs.push(InputRecord {
                    file,
                    sha256,
                    status: InputStatus::Failed,
                    detail: Some(error.to_string()),
                });
            }
        }
    }

    if config.strict && !warnings.is_empty() {
        return Err(PipelineError::StrictFailures { failures: warnings });
    }
    if stocks.is_empty() {
        return Err(PipelineError::NoValidInputs {
            dir: config.input_dir.clone(),
        });
    }

    let report_data = pool.install(|| cohort_report(&stocks, &config.backtest_config()))?;

    fs::create_dir_all(&config.output_dir).map_err(|source| PipelineError::Io {
        what: "create",
        path: config.output_dir.clone(),
        source,
    })?;

    let mut artifacts = Vec::new();
    let out = &config.output_dir;
    let write_csvs = matches!(config.format, OutputFormat::Csv | OutputFormat::Both);
    let write_json = matches!(config.format, OutputFormat::Json | OutputFormat::Both);
    if write_csvs {
        artifacts.push(write_artifact(
            out,
            report::PER_STOCK_CSV,
            &report::per_stock_csv(&report_data),
        )?);
        artifacts.push(write_artifact(
            out,
            report::PSI_HISTOGRAM_CSV,
            &report::psi_histogram_csv(&report_data),
        )?);
        artifacts.push(write_artifact(
            out,
            report::PSI_VS_MU_CSV,
            &report::psi_vs_mu_csv(&report_data),
        )?);
        artifacts.push(write_artifact(
            out,
            report::PSI_VS_ENTROPY_CSV,
            &report::psi_vs_entropy_csv(&report_data),
        )?);
        artifacts.push(write_artifact(
            out,
            report::PSI_VS_LENGTH_CSV,
            &report::psi_vs_length_csv(&report_data),
        )?);
    }
    if write_json {
        artifacts.push(write_artifact(
            out,
            report::COHORT_JSON,
            &report::cohort_json(&report_data),
        )?);
    }

    let manifest = Manifest {
        config: config.clone(),
        inputs,
        artifacts,
        warnings,
    };
    let mut manifest_bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|source| PipelineError::Serialize {
            what: "manifest",
            source,
        })?;
    manifest_bytes.push(b'\n');
    let manifest_path = out.join(report::MANIFEST_JSON);
    fs::write(&manifest_path, &manifest_bytes).map_err(|source| PipelineError::Io {
        what: "write",
        path: manifest_path,
        source,
    })?;

    Ok(PipelineOutcome {
        report: report_data,
        manifest,
    })
}
