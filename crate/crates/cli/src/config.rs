//! Run configuration shared by the CLI and the manifest.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mepp_core::backtest::{BacktestConfig, PsiDenominator, TieCreditMode};

/// Sampling regime of the input files; selects the zero-return default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// End-of-day prices; zero returns are meaningful and kept.
    Daily,
    /// Tick or bar prices; zero returns are dropped by default.
    Intraday,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

/// What the input CSVs contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// `timestamp,close` price files; the full pipeline applies.
    Prices,
    /// `timestamp,symbol` files of already-discretized states; the
    /// return and discretization stages are skipped.
    Symbols,
}

/// Complete description of one pipeline run. Serialized into the
/// manifest, so a run can be reproduced from the manifest alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub input_kind: InputKind,
    pub mode: Mode,
    pub omega: u32,
    pub mu_min: usize,
    pub mu_max: usize,
    pub mu_step: usize,
    pub tau: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub strict: bool,
    pub timestamp_column: String,
    pub price_column: String,
    /// Overrides the mode default when set.
    pub drop_zero_returns: Option<bool>,
    pub tie_credit_mode: TieCreditMode,
    pub psi_denominator: PsiDenominator,
    /// Worker-pool cap; `None` uses every core. Excluded from the
    /// manifest: worker count never changes any output byte, so it is an
    /// execution detail rather than part of the experiment.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.omega < 2 {
            return Err(format!("omega must be at least 2, got {}", self.omega));
        }
        if self.mu_min < 2 {
            return Err(format!("mu_min must be at least 2, got {}", self.mu_min));
        }
        if self.mu_min > self.mu_max {
            return Err(format!(
                "mu_min {} exceeds mu_max {}",
                self.mu_min, self.mu_max
            ));
        }
        if self.mu_step < 1 {
            return Err("mu_step must be at least 1".to_string());
        }
        if self.tau < 1 {
            return Err(format!("tau must be at least 1, got {}", self.tau));
        }
        Ok(())
    }

    pub fn mu_grid(&self) -> Vec<usize> {
        (self.mu_min..=self.mu_max).step_by(self.mu_step).collect()
    }

    /// Zero-return filter: explicit override, otherwise on for intraday.
    pub fn drop_zeros(&self) -> bool {
        self.drop_zero_returns
            .unwrap_or(matches!(self.mode, Mode::Intraday))
    }

    pub fn backtest_config(&self) -> BacktestConfig {
        BacktestConfig {
            mu_grid: self.mu_grid(),
            omega: self.omega,
            tie_credit_mode: self.tie_credit_mode,
            psi_denominator: self.psi_denominator,
        }
    }
}

/// Parses a window-grid spec: `A` (single length), `A:B` (step 1), or
/// `A:B:S`.
pub fn parse_mu_spec(spec: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<usize, String> {
        s.trim()
            .parse()
            .map_err(|_| format!("invalid window length `{s}`"))
    };
    match parts.as_slice() {
        [single] => {
            let v = parse(single)?;
            Ok((v, v, 1))
        }
        [lo, hi] => Ok((parse(lo)?, parse(hi)?, 1)),
        [lo, hi, step] => Ok((parse(lo)?, parse(hi)?, parse(step)?)),
        _ => Err(format!("invalid mu spec `{spec}`; expected MIN:MAX:STEP")),
    }
}
