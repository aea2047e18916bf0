//! Partial-match span F1.
//!
//! Matching is greedy one-to-one in reading order: both sides sorted by
//! (start, end), each predicted span pairs with the first unmatched gold
//! span it matches. The default criterion is overlap in at least one
//! character; the proportional criterion requires the intersection to
//! cover at least half of the longer span.

use alloc::vec::Vec;

use super::{f1_of, ratio, MetricsError};
use crate::textprep::CharSpan;

/// Span match criterion, selectable per evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchCriterion {
    /// Any overlap of >= 1 character counts.
    #[default]
    Overlap1,
    /// Intersection must cover at least half of the longer span
    /// (2 * |intersection| >= max(|pred|, |gold|)).
    Proportional,
}

impl MatchCriterion {
    pub fn parse(s: &str) -> Option<MatchCriterion> {
        match s {
            "overlap1" => Some(MatchCriterion::Overlap1),
            "proportional" => Some(MatchCriterion::Proportional),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MatchCriterion::Overlap1 => "overlap1",
            MatchCriterion::Proportional => "proportional",
        }
    }

    fn matches(self, pred: &CharSpan, gold: &CharSpan) -> bool {
        let inter = intersection_len(pred, gold);
        match self {
            MatchCriterion::Overlap1 => inter >= 1,
            MatchCriterion::Proportional => 2 * inter >= pred.len().max(gold.len()),
        }
    }
}

fn intersection_len(a: &CharSpan, b: &CharSpan) -> usize {
    let lo = a.start.max(b.start);
    let hi = a.end.min(b.end);
    hi.saturating_sub(lo)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpanF1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub pred_count: usize,
    pub gold_count: usize,
}

fn validate(spans: &[CharSpan]) -> Result<(), MetricsError> {
    for s in spans {
        if s.start >= s.end {
            return Err(MetricsError::InvalidSpan {
                start: s.start,
                end: s.end,
            });
        }
    }
    Ok(())
}

fn count_matches(
    pred: &[CharSpan],
    gold: &[CharSpan],
    criterion: MatchCriterion,
) -> Result<usize, MetricsError> {
    validate(pred)?;
    validate(gold)?;
    let mut pred = pred.to_vec();
    let mut gold = gold.to_vec();
    pred.sort_by_key(|s| (s.start, s.end));
    gold.sort_by_key(|s| (s.start, s.end));
    let mut gold_used = alloc::vec![false; gold.len()];
    let mut matched = 0;
    for p in &pred {
        for (gi, g) in gold.iter().enumerate() {
            if !gold_used[gi] && criterion.matches(p, g) {
                gold_used[gi] = true;
                matched += 1;
                break;
            }
        }
    }
    Ok(matched)
}

fn report(matched: usize, pred_count: usize, gold_count: usize) -> SpanF1Report {
    if pred_count == 0 && gold_count == 0 {
        // Two empty span sets agree vacuously.
        return SpanF1Report {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            matched: 0,
            pred_count: 0,
            gold_count: 0,
        };
    }
    let precision = ratio(matched, pred_count);
    let recall = ratio(matched, gold_count);
    SpanF1Report {
        precision,
        recall,
        f1: f1_of(precision, recall),
        matched,
        pred_count,
        gold_count,
    }
}

/// Partial-match F1 between one predicted and one gold span set.
pub fn span_partial_f1(
    pred: &[CharSpan],
    gold: &[CharSpan],
    criterion: MatchCriterion,
) -> Result<SpanF1Report, MetricsError> {
    let matched = count_matches(pred, gold, criterion)?;
    Ok(report(matched, pred.len(), gold.len()))
}

/// Micro-averaged partial-match F1 over many instances: match counts and
/// span counts are summed before the ratios.
pub fn span_partial_f1_micro(
    instances: &[(Vec<CharSpan>, Vec<CharSpan>)],
    criterion: MatchCriterion,
) -> Result<SpanF1Report, MetricsError> {
    let mut matched = 0;
    let mut pred_count = 0;
    let mut gold_count = 0;
    for (pred, gold) in instances {
        matched += count_matches(pred, gold, criterion)?;
        pred_count += pred.len();
        gold_count += gold.len();
    }
    Ok(report(matched, pred_count, gold_count))
}
