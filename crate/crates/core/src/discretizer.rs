//! Quantile discretization of log-return series.
//!
//! Thresholds are computed once over the entire series ("global"
//! discretization): cut point `T_k` is the lower empirical `k/Ω`
//! quantile, i.e. the `⌈k·n/Ω⌉`-th order statistic. A value `v` maps to
//! the smallest state `k` with `v ≤ T_k`, state `Ω` otherwise. With
//! heavily tied data the bins can come out unbalanced; callers surface
//! the per-state occupancy as a diagnostic rather than rebalancing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::LogReturnSeries;

/// Alphabet size for discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizationSpec {
    omega: u32,
}

impl DiscretizationSpec {
    pub fn new(omega: u32) -> Result<Self> {
        if omega < 2 {
            return Err(Error::AlphabetTooSmall { omega });
        }
        Ok(DiscretizationSpec { omega })
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec { omega: 4 }
    }
}

/// Ordered cut points `T_1 ≤ … ≤ T_{Ω-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    cut_points: Vec<f64>,
}

impl Thresholds {
    pub fn new(cut_points: Vec<f64>) -> Result<Self> {
        if cut_points.is_empty() {
            return Err(Error::AlphabetTooSmall { omega: 1 });
        }
        if cut_points.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig {
                reason: "cut points must be non-decreasing".to_string(),
            });
        }
        Ok(Thresholds { cut_points })
    }

    pub fn cut_points(&self) -> &[f64] {
        &self.cut_points
    }

    /// Alphabet size implied by the number of cut points.
    pub fn omega(&self) -> u32 {
        self.cut_points.len() as u32 + 1
    }
}

/// Discretized series over the alphabet `{1..Ω}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeries {
    instrument_id: String,
    symbols: Vec<u32>,
    omega: u32,
}

impl SymbolSeries {
    pub fn new(instrument_id: impl Into<String>, symbols: Vec<u32>, omega: u32) -> Result<Self> {
        if omega < 2 {
            return Err(Error::AlphabetTooSmall { omega });
        }
        for &s in &symbols {
            if s < 1 || s > omega {
                return Err(Error::SymbolOutOfRange { symbol: s, omega });
            }
        }
        Ok(SymbolSeries {
            instrument_id: instrument_id.into(),
            symbols,
            omega,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Empirical quantile cut points over the whole series.
///
/// `T_k` is the `⌈k·n/Ω⌉`-th order statistic of the returns, so with
/// distinct values every state receives the same number of points (up to
/// divisibility).
pub fn quantile_thresholds(
    returns: &LogReturnSeries,
    spec: &DiscretizationSpec,
) -> Result<Thresholds> {
    let values = returns.values();
    let n = values.len();
    let omega = spec.omega() as usize;
    if n < omega {
        return Err(Error::SeriesTooShort {
            instrument_id: returns.instrument_id().to_string(),
            len: n,
            min: omega,
            what: "quantile thresholds",
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cut_points = (1..omega)
        .map(|k| {
            let rank = (k * n).div_ceil(omega); // 1-based order statistic
            sorted[rank - 1]
        })
        .collect();
    Thresholds::new(cut_points)
}

/// Maps every return to the smallest state `k` with `v ≤ T_k`, or `Ω`
/// when the value exceeds every cut point.
pub fn discretize(returns: &LogReturnSeries, thresholds: &Thresholds) -> Result<SymbolSeries> {
    let cuts = thresholds.cut_points();
    let symbols = returns
        .values()
        .iter()
        .map(|&v| cuts.partition_point(|&t| t < v) as u32 + 1)
        .collect();
    SymbolSeries::new(returns.instrument_id(), symbols, thresholds.omega())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{LogReturnSeries, ReturnSpec};
    use proptest::prelude::*;

    fn returns(values: Vec<f64>) -> LogReturnSeries {
        LogReturnSeries::from_values("test", values, ReturnSpec::default())
    }

    #[test]
    fn quartiles_of_one_through_eight() {
        let r = returns((1..=8).map(f64::from).collect());
        let spec = DiscretizationSpec::new(4).unwrap();
        let t = quantile_thresholds(&r, &spec).unwrap();
        assert_eq!(t.cut_points(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn degenerate_distribution() {
        let r = returns(vec![3.5; 10]);
        let spec = DiscretizationSpec::new(4).unwrap();
        let t = quantile_thresholds(&r, &spec).unwrap();
        assert_eq!(t.cut_points(), &[3.5, 3.5, 3.5]);
    }

    #[test]
    fn median_cut_of_unsorted_values() {
        let r = returns(vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
        let spec = DiscretizationSpec::new(2).unwrap();
        let t = quantile_thresholds(&r, &spec).unwrap();
        assert_eq!(t.cut_points(), &[3.0]);
    }

    #[test]
    fn too_short_for_alphabet() {
        let r = returns(vec![1.0, 2.0, 3.0]);
        let spec = DiscretizationSpec::new(4).unwrap();
        assert!(quantile_thresholds(&r, &spec).is_err());
    }

    #[test]
    fn balanced_quartile_symbols() {
        let r = returns((1..=8).map(f64::from).collect());
        let t = Thresholds::new(vec![2.0, 4.0, 6.0]).unwrap();
        let s = discretize(&r, &t).unwrap();
        assert_eq!(s.symbols(), &[1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn values_above_last_cut_get_top_state() {
        let r = returns(vec![100.0]);
        let t = Thresholds::new(vec![2.0, 4.0, 6.0]).unwrap();
        let s = discretize(&r, &t).unwrap();
        assert_eq!(s.symbols(), &[4]);
    }

    #[test]
    fn degenerate_cuts_collapse_to_state_one() {
        let r = returns(vec![0.5; 6]);
        let t = Thresholds::new(vec![0.5, 0.5, 0.5]).unwrap();
        let s = discretize(&r, &t).unwrap();
        assert_eq!(s.symbols(), &[1; 6]);
    }

    #[test]
    fn symbol_series_validates_range() {
        assert!(SymbolSeries::new("x", vec![1, 2, 5], 4).is_err());
        assert!(SymbolSeries::new("x", vec![0], 4).is_err());
        assert!(SymbolSeries::new("x", vec![1, 4], 4).is_ok());
    }

    #[test]
    fn exact_balance_with_distinct_values_divisible_by_omega() {
        let n = 1000;
        // Deterministic distinct values in shuffled order.
        let values: Vec<f64> = (0..n)
            .map(|i| ((i * 467) % n) as f64 * 0.01 - 3.0)
            .collect();
        let r = returns(values);
        let spec = DiscretizationSpec::new(4).unwrap();
        let t = quantile_thresholds(&r, &spec).unwrap();
        let s = discretize(&r, &t).unwrap();
        let mut counts = [0usize; 4];
        for &sym in s.symbols() {
            counts[sym as usize - 1] += 1;
        }
        assert_eq!(counts, [250, 250, 250, 250]);
    }

    proptest! {
        #[test]
        fn discretization_is_monotone(values in proptest::collection::vec(-1.0f64..1.0, 4..100)) {
            let r = returns(values.clone());
            let spec = DiscretizationSpec::new(4).unwrap();
            let t = quantile_thresholds(&r, &spec).unwrap();
            let s = discretize(&r, &t).unwrap();
            let mut pairs: Vec<(f64, u32)> = values.iter().copied().zip(s.symbols().iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            prop_assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        }

        #[test]
        fn strictly_increasing_transform_preserves_symbols(
            values in proptest::collection::vec(-1.0f64..1.0, 4..100),
        ) {
            let spec = DiscretizationSpec::new(4).unwrap();

            let r = returns(values.clone());
            let t = quantile_thresholds(&r, &spec).unwrap();
            let base = discretize(&r, &t).unwrap();

            // x^3 + 2x is strictly increasing on all of R.
            let transformed: Vec<f64> = values.iter().map(|&v| v * v * v + 2.0 * v).collect();
            let rt = returns(transformed);
            let tt = quantile_thresholds(&rt, &spec).unwrap();
            let mapped = discretize(&rt, &tt).unwrap();

            prop_assert_eq!(base.symbols(), mapped.symbols());
        }
    }
}
