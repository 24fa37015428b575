//! Seed derivation and interval estimates.

/// The `(trial + 1)`-th output of a SplitMix64 generator started at
/// `master_seed`. Trials get well-separated seeds and any trial can be
/// reproduced on its own.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut z = master_seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson95(successes: usize, n: usize) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Standard error of a Bernoulli proportion.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: std::collections::HashSet<_> = (0..10_000).map(|i| trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_eq!(trial_seed(42, 7), trial_seed(42, 7));
        assert_ne!(trial_seed(42, 7), trial_seed(43, 7));
        // first SplitMix64 output from state 0
        assert_eq!(trial_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn wilson_interval() {
        assert_eq!(wilson95(0, 0), None);
        let (lo, hi) = wilson95(0, 200).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.018_84).abs() < 1e-4);
        let (lo, hi) = wilson95(50, 100).unwrap();
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }
}
