//! One-step-ahead prediction by entropy-rate maximization.
//!
//! Given a window of symbols, every one-symbol extension is scored with
//! the Lempel–Ziv entropy-rate estimate; the predicted next state is the
//! extension that maximizes it. All candidate extensions share the window
//! length, so the argmax over `Ĥ = n·log2(n)/ΣΛ` is resolved as an
//! argmin over the integer match-length sums — ties are exact, never a
//! float artifact. Ties break to the smallest symbol and are flagged so
//! downstream scoring can report or reweight them.

use serde::Serialize;

use crate::discretizer::SymbolSeries;
use crate::entropy::entropy_rate_from_lambda_sum;
use crate::error::{Error, Result};
use crate::sam::MatchLengthScanner;

/// Outcome of a single prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// Symbol with the maximal extension entropy (smallest index on ties).
    pub predicted_symbol: u32,
    /// Entropy-rate estimate of each extension, indexed by symbol − 1.
    pub candidate_h: Vec<f64>,
    /// True when more than one symbol attains the maximum.
    pub tie: bool,
    /// All symbols attaining the maximum, ascending.
    pub tied_set: Vec<u32>,
}

/// Reusable evaluator for the hot path; keeps one automaton and the
/// per-candidate sums alive across calls.
pub(crate) struct SlicePredictor {
    scanner: MatchLengthScanner,
    sums: Vec<u64>,
}

/// Integer view of one prediction: match-length sums per candidate plus
/// the resolved argmin.
pub(crate) struct SliceOutcome<'a> {
    pub lambda_sums: &'a [u64],
    pub predicted: u32,
    pub min_sum: u64,
    pub tie_count: u32,
}

impl SlicePredictor {
    pub(crate) fn new() -> Self {
        SlicePredictor {
            scanner: MatchLengthScanner::new(),
            sums: Vec::new(),
        }
    }

    pub(crate) fn predict(&mut self, window: &[u32], omega: u32) -> SliceOutcome<'_> {
        self.sums.clear();
        for candidate in 1..=omega {
            let sum = self
                .scanner
                .scan(window, Some(candidate), omega, None);
            self.sums.push(sum);
        }
        let mut min_sum = u64::MAX;
        let mut predicted = 1u32;
        let mut tie_count = 0u32;
        for (idx, &sum) in self.sums.iter().enumerate() {
            if sum < min_sum {
                min_sum = sum;
                predicted = idx as u32 + 1;
                tie_count = 1;
            } else if sum == min_sum {
                tie_count += 1;
            }
        }
        SliceOutcome {
            lambda_sums: &self.sums,
            predicted,
            min_sum,
            tie_count,
        }
    }
}

fn check_window(window: &SymbolSeries) -> Result<()> {
    if window.len() < 2 {
        return Err(Error::SeriesTooShort {
            instrument_id: window.instrument_id().to_string(),
            len: window.len(),
            min: 2,
            what: "prediction window",
        });
    }
    Ok(())
}

/// Entropy-rate estimate of each one-symbol extension of the window,
/// indexed by symbol − 1.
pub fn candidate_entropies(window: &SymbolSeries) -> Result<Vec<f64>> {
    check_window(window)?;
    let mut predictor = SlicePredictor::new();
    let extended_len = window.len() + 1;
    let outcome = predictor.predict(window.symbols(), window.omega());
    Ok(outcome
        .lambda_sums
        .iter()
        .map(|&sum| entropy_rate_from_lambda_sum(extended_len, sum))
        .collect())
}

/// Predicts the next symbol as the extension maximizing the entropy-rate
/// estimate. Ties break to the smallest symbol index and are flagged.
pub fn mepp_predict(window: &SymbolSeries) -> Result<Prediction> {
    check_window(window)?;
    let mut predictor = SlicePredictor::new();
    let extended_len = window.len() + 1;
    let outcome = predictor.predict(window.symbols(), window.omega());
    let candidate_h: Vec<f64> = outcome
        .lambda_sums
        .iter()
        .map(|&sum| entropy_rate_from_lambda_sum(extended_len, sum))
        .collect();
    let tied_set: Vec<u32> = outcome
        .lambda_sums
        .iter()
        .enumerate()
        .filter(|(_, &sum)| sum == outcome.min_sum)
        .map(|(idx, _)| idx as u32 + 1)
        .collect();
    Ok(Prediction {
        predicted_symbol: outcome.predicted,
        candidate_h,
        tie: tied_set.len() > 1,
        tied_set,
    })
}
