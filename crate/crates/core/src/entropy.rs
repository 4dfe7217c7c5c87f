//! Entropy and entropy-rate estimation kernels.
//!
//! Three estimators live here:
//!
//! * [`shannon_entropy`] — plug-in entropy of a histogram, in bits.
//! * [`lz_entropy_rate`] — Lempel–Ziv entropy-rate estimate
//!   `Ĥ = n·log2(n) / ΣΛ_i`, where `Λ_i` is one plus the length of the
//!   longest string starting at position `i` that occurs as a contiguous
//!   substring entirely within positions `1..i-1`.
//! * [`lz76_pattern_count`] — distinct-phrase count under
//!   shortest-unseen-prefix parsing.
//!
//! Match lengths are produced by a suffix automaton grown one symbol at a
//! time (`O(n·Ω)` total), so whole tick histories are cheap to estimate.
//! A brute-force scan kept in [`crate::reference`] validates the kernel.

use std::collections::HashSet;

use serde::Serialize;

use crate::discretizer::SymbolSeries;
use crate::error::{Error, Result};
use crate::sam::MatchLengthScanner;

/// Entropy-rate estimate plus the match-length diagnostics behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// Estimated entropy rate in bits per symbol.
    pub h_hat: f64,
    /// Length of the estimated series.
    pub n: usize,
    /// Sum of the match lengths `ΣΛ_i`.
    pub lambda_sum: u64,
}

/// Non-negative outcome counts with at least one non-zero entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramCounts {
    counts: Vec<u64>,
}

impl HistogramCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyHistogram);
        }
        Ok(HistogramCounts { counts })
    }

    /// Per-symbol occupancy of a symbol series (index `s - 1` holds the
    /// count of symbol `s`).
    pub fn from_symbols(series: &SymbolSeries) -> Result<Self> {
        let mut counts = vec![0u64; series.omega() as usize];
        for &s in series.symbols() {
            counts[s as usize - 1] += 1;
        }
        HistogramCounts::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Plug-in Shannon entropy in bits: `-Σ (c_i/n)·log2(c_i/n)` over the
/// outcomes with non-zero count.
pub fn shannon_entropy(counts: &HistogramCounts) -> f64 {
    let total: u64 = counts.counts().iter().sum();
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts.counts() {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Match lengths `Λ_1..Λ_n` of a symbol series.
///
/// `Λ_i = L_i + 1` where `L_i` is the length of the longest string
/// starting at position `i`, of length at most `n - i + 1`, that occurs
/// as a contiguous substring entirely within positions `1..i-1`
/// (`L_1 = 0`). A match may therefore exhaust the remaining suffix, in
/// which case `Λ_i` exceeds the remaining length by one.
pub fn match_lengths(series: &SymbolSeries) -> Result<Vec<u32>> {
    if series.is_empty() {
        return Err(Error::SeriesTooShort {
            instrument_id: series.instrument_id().to_string(),
            len: 0,
            min: 1,
            what: "match lengths",
        });
    }
    let mut scanner = MatchLengthScanner::new();
    let mut out = Vec::new();
    scanner.scan(series.symbols(), None, series.omega(), Some(&mut out));
    Ok(out)
}

/// Lempel–Ziv entropy-rate estimate `Ĥ = n·log2(n) / ΣΛ_i` in bits per
/// symbol. Requires `n ≥ 2`.
pub fn lz_entropy_rate(series: &SymbolSeries) -> Result<EntropyEstimate> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort {
            instrument_id: series.instrument_id().to_string(),
            len: n,
            min: 2,
            what: "entropy-rate estimation",
        });
    }
    let mut scanner = MatchLengthScanner::new();
    let lambda_sum = scanner.scan(series.symbols(), None, series.omega(), None);
    Ok(EntropyEstimate {
        h_hat: entropy_rate_from_lambda_sum(n, lambda_sum),
        n,
        lambda_sum,
    })
}

#[inline]
pub(crate) fn entropy_rate_from_lambda_sum(n: usize, lambda_sum: u64) -> f64 {
    n as f64 * (n as f64).log2() / lambda_sum as f64
}

/// Left-to-right parse into phrases, each the shortest prefix of the
/// remainder not seen as a phrase before. The final phrase is kept even
/// when it duplicates an earlier one.
pub fn lz76_parse(series: &SymbolSeries) -> Result<Vec<Vec<u32>>> {
    let s = series.symbols();
    if s.is_empty() {
        return Err(Error::SeriesTooShort {
            instrument_id: series.instrument_id().to_string(),
            len: 0,
            min: 1,
            what: "pattern parsing",
        });
    }
    let mut seen: HashSet<&[u32]> = HashSet::new();
    let mut phrases = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut len = 1;
        while i + len <= s.len() && seen.contains(&s[i..i + len]) {
            len += 1;
        }
        let end = (i + len).min(s.len());
        seen.insert(&s[i..end]);
        phrases.push(s[i..end].to_vec());
        i = end;
    }
    Ok(phrases)
}

/// Number of distinct patterns produced by [`lz76_parse`].
pub fn lz76_pattern_count(series: &SymbolSeries) -> Result<usize> {
    Ok(lz76_parse(series)?.len())
}
