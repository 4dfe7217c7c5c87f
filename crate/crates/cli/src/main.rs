use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mepp_cli::config::{parse_mu_spec, InputKind, Mode, OutputFormat, RunConfig};
use mepp_cli::pipeline::{exit_code_for, run_pipeline};
use mepp_cli::report::fmt_sig;
use mepp_cli::synth::{write_fixture, SynthKind, SynthSpec};
use mepp_core::backtest::{PsiDenominator, TieCreditMode};
use mepp_core::discretizer::{discretize, quantile_thresholds, DiscretizationSpec};
use mepp_core::entropy::lz_entropy_rate;
use mepp_core::market_data::{compute_log_returns, load_price_csv, CsvLayout, ReturnSpec};
use mepp_core::predictor::mepp_predict;
use mepp_core::SymbolSeries;

#[derive(Parser)]
#[command(
    name = "mepp",
    version,
    about = "Estimate entropy rates of discretized return series and backtest \
             maximum-entropy-production predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieCreditArg {
    FirstSymbol,
    Fractional,
}

impl From<TieCreditArg> for TieCreditMode {
    fn from(arg: TieCreditArg) -> Self {
        match arg {
            TieCreditArg::FirstSymbol => TieCreditMode::FirstSymbol,
            TieCreditArg::Fractional => TieCreditMode::Fractional,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PsiDenominatorArg {
    /// Scored positions, N−μ−1.
    Scored,
    /// Window count, N−μ.
    Window,
}

impl From<PsiDenominatorArg> for PsiDenominator {
    fn from(arg: PsiDenominatorArg) -> Self {
        match arg {
            PsiDenominatorArg::Scored => PsiDenominator::ScoredPositions,
            PsiDenominatorArg::Window => PsiDenominator::WindowCount,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over a directory of CSV files.
    Run {
        #[arg(long)]
        input_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = InputKind::Prices)]
        input_kind: InputKind,
        #[arg(long, value_enum, default_value_t = Mode::Daily)]
        mode: Mode,
        #[arg(long, default_value_t = 4)]
        omega: u32,
        /// Window grid MIN:MAX:STEP (also MIN:MAX with step 1, or a
        /// single value).
        #[arg(long, default_value = "20:100:10")]
        mu: String,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out")]
        output_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
        format: OutputFormat,
        /// Abort on the first failed input file instead of warning.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value = "timestamp")]
        timestamp_col: String,
        #[arg(long, default_value = "close")]
        price_col: String,
        /// Override the mode default for dropping exact-zero returns.
        #[arg(long)]
        drop_zero_returns: Option<bool>,
        #[arg(long, value_enum, default_value_t = TieCreditArg::FirstSymbol)]
        tie_credit: TieCreditArg,
        #[arg(long, value_enum, default_value_t = PsiDenominatorArg::Scored)]
        psi_denominator: PsiDenominatorArg,
        /// Worker cap; defaults to MEPP_THREADS or all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Predict the next state of a comma-separated symbol window.
    Predict {
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 4)]
        omega: u32,
    },
    /// Entropy-rate estimate of a single price file.
    Entropy {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        omega: u32,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, value_enum, default_value_t = Mode::Daily)]
        mode: Mode,
        #[arg(long, default_value = "timestamp")]
        timestamp_col: String,
        #[arg(long, default_value = "close")]
        price_col: String,
        #[arg(long)]
        drop_zero_returns: Option<bool>,
    },
    /// Generate synthetic fixture files.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        omega: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seed-symbol count for mepp fixtures; a backtest window
        /// spanning this many symbols reproduces the series.
        #[arg(long, default_value_t = 21)]
        warmup: usize,
        #[arg(long = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Serialize)]
struct EntropyOutput {
    instrument_id: String,
    n: usize,
    omega: u32,
    tau: usize,
    h_hat: f64,
    lambda_sum: u64,
}

fn env_threads() -> Option<usize> {
    std::env::var("MEPP_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            input_dir,
            input_kind,
            mode,
            omega,
            mu,
            tau,
            seed,
            output_dir,
            format,
            strict,
            timestamp_col,
            price_col,
            drop_zero_returns,
            tie_credit,
            psi_denominator,
            threads,
        } => {
            let (mu_min, mu_max, mu_step) = parse_mu_spec(&mu)?;
            let config = RunConfig {
                input_dir,
                input_kind,
                mode,
                omega,
                mu_min,
                mu_max,
                mu_step,
                tau,
                seed,
                output_dir,
                format,
                strict,
                timestamp_column: timestamp_col,
                price_column: price_col,
                drop_zero_returns,
                tie_credit_mode: tie_credit.into(),
                psi_denominator: psi_denominator.into(),
                threads: threads.or_else(env_threads),
            };
            match run_pipeline(&config) {
                Ok(outcome) => {
                    for warning in &outcome.manifest.warnings {
                        eprintln!("warning: {warning}");
                    }
                    let report = &outcome.report;
                    println!(
                        "processed {} instrument(s), mu grid {:?}",
                        report.per_stock.len(),
                        report.mu_grid
                    );
                    println!(
                        "cohort mean psi {} (std {}), thresholds: unadjusted {}, adjusted up to {}",
                        fmt_sig(report.mean_psi, 6),
                        fmt_sig(report.std_psi, 6),
                        fmt_sig(report.thresholds.unadjusted, 6),
                        fmt_sig(
                            report
                                .thresholds
                                .adjusted_by_mu
                                .values()
                                .copied()
                                .fold(f64::NEG_INFINITY, f64::max),
                            6
                        )
                    );
                    match report.pearson_psi_vs_h {
                        Some(r) => println!("pearson(psi, entropy rate) = {}", fmt_sig(r, 6)),
                        None => println!("pearson(psi, entropy rate) undefined"),
                    }
                    println!("artifacts written to {}", config.output_dir.display());
                    Ok(ExitCode::SUCCESS)
                }
                Err(error) => {
                    eprintln!("error: {error}");
                    Ok(ExitCode::from(exit_code_for(&error)))
                }
            }
        }
        Command::Predict { window, omega } => {
            let symbols: Vec<u32> = window
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<u32>()
                        .map_err(|_| format!("invalid symbol `{part}`"))
                })
                .collect::<Result<_, _>>()?;
            let series =
                SymbolSeries::new("window", symbols, omega).map_err(|e| e.to_string())?;
            let prediction = mepp_predict(&series).map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&prediction).map_err(|e| e.to_string())?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy {
            file,
            omega,
            tau,
            mode,
            timestamp_col,
            price_col,
            drop_zero_returns,
        } => {
            let layout = CsvLayout {
                timestamp_column: timestamp_col,
                price_column: price_col,
                instrument_id: None,
            };
            let prices = load_price_csv(&file, &layout).map_err(|e| e.to_string())?;
            let drop_zeros = drop_zero_returns.unwrap_or(matches!(mode, Mode::Intraday));
            let spec = ReturnSpec::new(tau, drop_zeros).map_err(|e| e.to_string())?;
            let returns = compute_log_returns(&prices, spec).map_err(|e| e.to_string())?;
            let disc = DiscretizationSpec::new(omega).map_err(|e| e.to_string())?;
            let thresholds = quantile_thresholds(&returns, &disc).map_err(|e| e.to_string())?;
            let symbols = discretize(&returns, &thresholds).map_err(|e| e.to_string())?;
            let estimate = lz_entropy_rate(&symbols).map_err(|e| e.to_string())?;
            let output = EntropyOutput {
                instrument_id: symbols.instrument_id().to_string(),
                n: estimate.n,
                omega,
                tau,
                h_hat: estimate.h_hat,
                lambda_sum: estimate.lambda_sum,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&output).map_err(|e| e.to_string())?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            kind,
            count,
            n,
            omega,
            seed,
            warmup,
            out_dir,
        } => {
            let spec = SynthSpec {
                kind,
                count,
                n,
                omega,
                seed,
                warmup,
                out_dir,
            };
            let paths = write_fixture(&spec).map_err(|e| e.to_string())?;
            println!("wrote {} fixture file(s) to {}", paths.len(), spec.out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
