//! Uninformed baselines for Table-style comparisons: majority class,
//! class-prior random, and lexicon membership.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{MetricsError, Outcome};
use crate::rng::SplitMix64;

/// Predicts the majority gold label everywhere; ties go to negative.
pub fn baseline_majority(gold: &[bool]) -> Vec<Outcome> {
    let positives = gold.iter().filter(|&&g| g).count();
    let negatives = gold.len() - positives;
    let label = if positives > negatives {
        Outcome::Positive
    } else {
        Outcome::Negative
    };
    alloc::vec![label; gold.len()]
}

/// Predicts positive i.i.d. with probability `prior`, drawing from the
/// fixed PRNG stream of `seed`.
pub fn baseline_random(len: usize, prior: f64, seed: u64) -> Result<Vec<Outcome>, MetricsError> {
    if !(0.0..=1.0).contains(&prior) {
        return Err(MetricsError::InvalidPrior(prior));
    }
    let mut rng = SplitMix64::new(seed);
    Ok((0..len)
        .map(|_| {
            if rng.next_f64() < prior {
                Outcome::Positive
            } else {
                Outcome::Negative
            }
        })
        .collect())
}

/// Flags a token positive iff its surface appears in the metaphor
/// lexicon. Context-free by design; this is the heuristic lower bound.
pub fn baseline_lexicon(surfaces: &[String], lexicon: &BTreeSet<String>) -> Vec<Outcome> {
    surfaces
        .iter()
        .map(|s| {
            if lexicon.contains(s) {
                Outcome::Positive
            } else {
                Outcome::Negative
            }
        })
        .collect()
}
