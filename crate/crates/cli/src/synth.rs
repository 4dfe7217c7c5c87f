//! Synthetic fixture generation.
//!
//! Two kinds of fixture: `iid` price files whose returns are uniform
//! draws (the null control — quartile binning of continuous IID returns
//! yields IID uniform symbols), and `mepp` symbol files that follow the
//! maximum-entropy-production path by construction (the positive
//! control). Everything is seeded, so fixtures are bit-reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use mepp_core::backtest::generate_mepp_series;

use crate::pipeline::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Price CSVs with IID uniform returns.
    Iid,
    /// Symbol CSVs following the entropy-maximizing path.
    Mepp,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub kind: SynthKind,
    /// Number of fixture files.
    pub count: usize,
    /// Series length: returns for `iid`, symbols for `mepp`.
    pub n: usize,
    pub omega: u32,
    pub seed: u64,
    /// Seed-symbol count for `mepp`; windows spanning this many symbols
    /// (backtest window length `warmup − 1`) reproduce the series.
    pub warmup: usize,
    pub out_dir: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|source| PipelineError::Io {
        what: "write",
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the fixture files and returns their paths in name order.
pub fn write_fixture(spec: &SynthSpec) -> Result<Vec<PathBuf>, PipelineError> {
    if spec.count == 0 {
        return Err(PipelineError::InvalidConfig {
            reason: "fixture count must be at least 1".to_string(),
        });
    }
    fs::create_dir_all(&spec.out_dir).map_err(|source| PipelineError::Io {
        what: "create",
        path: spec.out_dir.clone(),
        source,
    })?;

    let mut paths = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let stock_seed = spec.seed.wrapping_add(k as u64);
        let (name, contents) = match spec.kind {
            SynthKind::Iid => (
                format!("iid_{k:03}.csv"),
                iid_price_csv(spec.n, stock_seed),
            ),
            SynthKind::Mepp => (
                format!("mepp_{k:03}.csv"),
                mepp_symbol_csv(spec.n, spec.omega, stock_seed, spec.warmup)?,
            ),
        };
        let path = spec.out_dir.join(name);
        write_file(&path, &contents)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Price file with `n` IID uniform log returns in (−0.05, 0.05).
fn iid_price_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity((n + 1) * 24);
    out.push_str("timestamp,close\n");
    let mut price = 100.0f64;
    out.push_str(&format!("1,{price:.12}\n"));
    for t in 0..n {
        let log_return: f64 = rng.random_range(-0.05..0.05);
        price *= log_return.exp();
        out.push_str(&format!("{},{price:.12}\n", t + 2));
    }
    out
}

fn mepp_symbol_csv(
    n: usize,
    omega: u32,
    seed: u64,
    warmup: usize,
) -> Result<String, PipelineError> {
    let series = generate_mepp_series(n, omega, seed, warmup)?;
    let mut out = String::with_capacity(n * 8);
    out.push_str("timestamp,symbol\n");
    for (t, &symbol) in series.symbols().iter().enumerate() {
        out.push_str(&format!("{},{symbol}\n", t + 1));
    }
    Ok(out)
}
