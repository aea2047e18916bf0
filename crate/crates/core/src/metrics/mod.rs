//! Evaluation metrics: binary P/R/F1, partial-match span F1, pairwise
//! Cohen's kappa, bootstrap confidence intervals, and the uninformed
//! baselines.
//!
//! Conventions, pinned once here: a ratio with a zero denominator is 0
//! (so an all-negative prediction run scores F1 = 0.000 against a
//! positive-bearing gold set); ABSTAIN predictions count as negative but
//! are tallied separately. Everything is deterministic given seeds.

mod baseline;
mod bootstrap;
mod kappa;
mod span;

pub use baseline::{baseline_lexicon, baseline_majority, baseline_random};
pub use bootstrap::{bootstrap_f1, bootstrap_indices, BootstrapResult, DEFAULT_BOOTSTRAP_ITERATIONS};
pub use kappa::{band, cohen_kappa, kappa_matrix, KappaMatrix};
pub use span::{span_partial_f1, span_partial_f1_micro, MatchCriterion, SpanF1Report};

use alloc::string::String;
use core::fmt;

use crate::protocol::Label;

/// A binary prediction outcome. ABSTAIN scores as negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Positive,
    Negative,
    Abstain,
}

impl Outcome {
    pub fn is_positive(self) -> bool {
        self == Outcome::Positive
    }
}

impl From<Label> for Outcome {
    fn from(label: Label) -> Outcome {
        match label {
            Label::Metaphorical => Outcome::Positive,
            Label::Literal => Outcome::Negative,
            Label::Abstain => Outcome::Abstain,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    LengthMismatch { left: usize, right: usize },
    EmptyInput,
    InvalidSpan { start: usize, end: usize },
    InvalidPrior(f64),
    InvalidIterations,
    Custom(String),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            MetricsError::EmptyInput => write!(f, "empty input"),
            MetricsError::InvalidSpan { start, end } => {
                write!(f, "invalid span [{start}, {end})")
            }
            MetricsError::InvalidPrior(p) => write!(f, "prior {p} outside [0, 1]"),
            MetricsError::InvalidIterations => write!(f, "iterations must be >= 1"),
            MetricsError::Custom(msg) => f.write_str(msg),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricsError {}

/// Binary classification report over the metaphor-positive class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prf1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub abstain_count: usize,
}

/// Ratio with the 0-for-0/0 convention.
pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Precision, recall, F1, and accuracy of `preds` against boolean gold
/// labels. ABSTAIN counts as a negative prediction and is tallied in
/// `abstain_count`.
///
/// Division-by-zero convention: a ratio with zero denominator is 0,
/// except the fully vacuous case (no positives in gold and none
/// predicted), which is perfect agreement on the positive class and
/// scores P = R = F1 = 1. An all-negative run against positive-bearing
/// gold therefore scores 0.000, and resampling a perfect prediction set
/// always reproduces its score.
pub fn prf1(preds: &[Outcome], gold: &[bool]) -> Result<Prf1Report, MetricsError> {
    if preds.len() != gold.len() {
        return Err(MetricsError::LengthMismatch {
            left: preds.len(),
            right: gold.len(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fneg = 0;
    let mut tn = 0;
    let mut abstain_count = 0;
    for (&p, &g) in preds.iter().zip(gold) {
        if p == Outcome::Abstain {
            abstain_count += 1;
        }
        match (p.is_positive(), g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => tn += 1,
        }
    }
    let (precision, recall) = if tp + fp == 0 && tp + fneg == 0 {
        (1.0, 1.0)
    } else {
        (ratio(tp, tp + fp), ratio(tp, tp + fneg))
    };
    Ok(Prf1Report {
        precision,
        recall,
        f1: f1_of(precision, recall),
        accuracy: ratio(tp + tn, preds.len()),
        true_pos: tp,
        false_pos: fp,
        false_neg: fneg,
        true_neg: tn,
        abstain_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn o(bits: &[u8]) -> Vec<Outcome> {
        bits.iter()
            .map(|&b| {
                if b == 1 {
                    Outcome::Positive
                } else {
                    Outcome::Negative
                }
            })
            .collect()
    }

    #[test]
    fn perfect_predictions() {
        let gold = vec![true, false, true, false];
        let preds = o(&[1, 0, 1, 0]);
        let r = prf1(&preds, &gold).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.recall, 1.0);
        assert_eq!(r.f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn all_negative_against_positives_is_zero_f1() {
        let gold = vec![true, true, false];
        let preds = o(&[0, 0, 0]);
        let r = prf1(&preds, &gold).unwrap();
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.recall, 0.0);
    }

    #[test]
    fn hand_confusion_matrix() {
        // preds=[1,0,1,0] vs gold=[1,1,0,0]: tp=1 fp=1 fn=1 tn=1.
        let r = prf1(&o(&[1, 0, 1, 0]), &[true, true, false, false]).unwrap();
        assert_eq!(
            (r.true_pos, r.false_pos, r.false_neg, r.true_neg),
            (1, 1, 1, 1)
        );
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.5);
        assert_eq!(r.f1, 0.5);
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn abstain_counts_as_negative_and_is_tallied() {
        let preds = vec![Outcome::Abstain, Outcome::Positive, Outcome::Abstain];
        let gold = vec![true, true, false];
        let r = prf1(&preds, &gold).unwrap();
        assert_eq!(r.abstain_count, 2);
        assert_eq!(r.true_pos, 1);
        assert_eq!(r.false_neg, 1);
        assert_eq!(r.true_neg, 1);
    }

    #[test]
    fn vacuous_positive_class_is_perfect() {
        // No positives in gold, none predicted.
        let r = prf1(&o(&[0, 0]), &[false, false]).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        // Positives predicted against a positive-free gold: zero.
        let r = prf1(&o(&[1, 0]), &[false, false]).unwrap();
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            prf1(&o(&[1]), &[true, false]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    proptest! {
        // Jointly permuting (preds, gold) never changes the report.
        #[test]
        fn prf1_permutation_invariant(pairs in proptest::collection::vec((0u8..3, proptest::bool::ANY), 1..40), seed in 0u64..1000) {
            let preds: Vec<Outcome> = pairs.iter().map(|(p, _)| match p {
                0 => Outcome::Negative,
                1 => Outcome::Positive,
                _ => Outcome::Abstain,
            }).collect();
            let gold: Vec<bool> = pairs.iter().map(|(_, g)| *g).collect();
            let base = prf1(&preds, &gold).unwrap();

            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            let mut rng = crate::rng::SplitMix64::new(seed);
            for i in (1..idx.len()).rev() {
                let j = rng.next_below(i as u64 + 1) as usize;
                idx.swap(i, j);
            }
            let preds_p: Vec<Outcome> = idx.iter().map(|&i| preds[i]).collect();
            let gold_p: Vec<bool> = idx.iter().map(|&i| gold[i]).collect();
            prop_assert_eq!(base, prf1(&preds_p, &gold_p).unwrap());
        }
    }
}
