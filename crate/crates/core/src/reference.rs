//! Slow reference implementations used to cross-check the optimized
//! kernels. These share no code with the production paths: match lengths
//! are found by scanning every candidate start position, and the
//! reference hit rate re-derives each prediction from those scans.

/// Match lengths `Λ_i = L_i + 1` by direct substring search.
///
/// For every position `i`, every earlier start `j` is tried; a match may
/// use at most `i - j` symbols so that its occurrence ends before `i`.
pub fn brute_force_match_lengths(symbols: &[u32]) -> Vec<u32> {
    let n = symbols.len();
    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let mut longest = 0usize;
        for j in 0..i {
            let cap = (i - j).min(n - i);
            let mut m = 0;
            while m < cap && symbols[j + m] == symbols[i + m] {
                m += 1;
            }
            longest = longest.max(m);
        }
        lambdas.push(longest as u32 + 1);
    }
    lambdas
}

/// Entropy-rate estimate computed from the brute-force match lengths.
pub fn brute_force_entropy_rate(symbols: &[u32]) -> f64 {
    let n = symbols.len();
    let lambda_sum: u64 = brute_force_match_lengths(symbols)
        .iter()
        .map(|&l| u64::from(l))
        .sum();
    n as f64 * (n as f64).log2() / lambda_sum as f64
}

/// Hit count of the maximum-entropy-rate prediction rule over a sliding
/// window of `mu + 1` symbols, recomputed entirely from brute force.
///
/// Ties go to the smallest symbol. Returns `(hits, scored_positions)`.
pub fn brute_force_hits(symbols: &[u32], omega: u32, mu: usize) -> (u64, u64) {
    let n = symbols.len();
    let mut hits = 0u64;
    let mut scored = 0u64;
    let mut extended = Vec::with_capacity(mu + 2);
    for target in (mu + 1)..n {
        let window = &symbols[target - mu - 1..target];
        let mut best_symbol = 0u32;
        let mut best_h = f64::NEG_INFINITY;
        for candidate in 1..=omega {
            extended.clear();
            extended.extend_from_slice(window);
            extended.push(candidate);
            let h = brute_force_entropy_rate(&extended);
            if h > best_h {
                best_h = h;
                best_symbol = candidate;
            }
        }
        scored += 1;
        if best_symbol == symbols[target] {
            hits += 1;
        }
    }
    (hits, scored)
}
