//! Percentile bootstrap over resampled instance indices.
//!
//! Iteration `k` draws its indices from `SplitMix64::fork(seed, k)`, so
//! iterations are order-independent and the whole procedure is
//! reproducible from `(seed, iterations)` alone. The 95% interval uses
//! nearest-rank percentiles over the sorted statistics:
//! `lo = ceil(0.025 * B) - 1`, `hi = ceil(0.975 * B) - 1`.

use alloc::vec::Vec;

use super::{prf1, MetricsError, Outcome};
use crate::rng::SplitMix64;

pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapResult {
    /// Statistic over the original (unresampled) instances.
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Runs the bootstrap for a statistic defined over instance indices.
/// `stat` receives the index multiset of each resample (and once, for
/// the point estimate, the identity indices `0..n`).
pub fn bootstrap_indices<F>(
    n: usize,
    iterations: usize,
    seed: u64,
    mut stat: F,
) -> Result<BootstrapResult, MetricsError>
where
    F: FnMut(&[usize]) -> Result<f64, MetricsError>,
{
    if iterations == 0 {
        return Err(MetricsError::InvalidIterations);
    }
    if n == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let identity: Vec<usize> = (0..n).collect();
    let point_estimate = stat(&identity)?;

    let mut stats = Vec::with_capacity(iterations);
    let mut indices = Vec::with_capacity(n);
    for k in 0..iterations {
        let mut rng = SplitMix64::fork(seed, k as u64);
        indices.clear();
        for _ in 0..n {
            indices.push(rng.next_below(n as u64) as usize);
        }
        stats.push(stat(&indices)?);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("bootstrap statistic was NaN"));
    let b = stats.len();
    let lo_idx = percentile_index(0.025, b);
    let hi_idx = percentile_index(0.975, b);
    Ok(BootstrapResult {
        point_estimate,
        ci_low: stats[lo_idx],
        ci_high: stats[hi_idx],
        iterations,
        seed,
    })
}

/// Nearest-rank index for percentile `q` over `b` sorted values:
/// `ceil(q * b) - 1`, clamped to a valid index. Ceiling is computed
/// without float intrinsics (core has none).
fn percentile_index(q: f64, b: usize) -> usize {
    let product = q * b as f64;
    let truncated = product as usize;
    let rank = if (truncated as f64) < product {
        truncated + 1
    } else {
        truncated
    };
    rank.clamp(1, b) - 1
}

/// Bootstrap CI for the F1 of predictions against gold labels.
pub fn bootstrap_f1(
    preds: &[Outcome],
    gold: &[bool],
    iterations: usize,
    seed: u64,
) -> Result<BootstrapResult, MetricsError> {
    if preds.len() != gold.len() {
        return Err(MetricsError::LengthMismatch {
            left: preds.len(),
            right: gold.len(),
        });
    }
    bootstrap_indices(preds.len(), iterations, seed, |idx| {
        let p: Vec<Outcome> = idx.iter().map(|&i| preds[i]).collect();
        let g: Vec<bool> = idx.iter().map(|&i| gold[i]).collect();
        Ok(prf1(&p, &g)?.f1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_interval_collapses() {
        // Perfect predictions resample to perfect predictions.
        let preds = vec![Outcome::Positive, Outcome::Negative, Outcome::Positive];
        let gold = vec![true, false, true];
        let r = bootstrap_f1(&preds, &gold, 200, 9).unwrap();
        assert_eq!(r.point_estimate, 1.0);
        assert_eq!(r.ci_low, 1.0);
        assert_eq!(r.ci_high, 1.0);
    }

    #[test]
    fn same_seed_same_result() {
        let preds = vec![
            Outcome::Positive,
            Outcome::Negative,
            Outcome::Negative,
            Outcome::Positive,
        ];
        let gold = vec![true, true, false, false];
        let a = bootstrap_f1(&preds, &gold, 500, 42).unwrap();
        let b = bootstrap_f1(&preds, &gold, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interval_is_ordered_and_brackets_typical_point() {
        let preds = vec![
            Outcome::Positive,
            Outcome::Negative,
            Outcome::Negative,
            Outcome::Positive,
        ];
        let gold = vec![true, true, false, false];
        let r = bootstrap_f1(&preds, &gold, 1000, 7).unwrap();
        assert!(r.ci_low <= r.ci_high);
        assert!(r.ci_low <= r.point_estimate && r.point_estimate <= r.ci_high);
    }

    #[test]
    fn invalid_iterations_or_empty_input() {
        assert!(matches!(
            bootstrap_f1(&[], &[], 10, 1),
            Err(MetricsError::EmptyInput)
        ));
        assert!(matches!(
            bootstrap_f1(&[Outcome::Positive], &[true], 0, 1),
            Err(MetricsError::InvalidIterations)
        ));
    }

    #[test]
    fn percentile_indices_nearest_rank() {
        assert_eq!(percentile_index(0.025, 10), 0);
        assert_eq!(percentile_index(0.975, 10), 9);
        assert_eq!(percentile_index(0.025, 10_000), 249);
        assert_eq!(percentile_index(0.975, 10_000), 9749);
    }
}
