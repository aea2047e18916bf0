//! Evaluation and comparison over prediction + gold files: alignment,
//! token-boundary mapping, per-register breakdown, span scoring, and the
//! cross-run kappa matrix.

use std::collections::{BTreeMap, BTreeSet};

use biyu_core::dataset::{GoldInstance, LabelType, SentenceLabel, SpanRole, TokenLabel};
use biyu_core::metrics::{
    bootstrap_f1, kappa_matrix, prf1, span_partial_f1_micro, BootstrapResult, KappaMatrix,
    MatchCriterion, Outcome, Prf1Report, SpanF1Report,
};
use biyu_core::protocol::Label;
use biyu_core::textprep::CharSpan;

use crate::error::{Error, Result};
use crate::predictions::PredRecord;

#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalReport {
    pub level: LabelType,
    pub compared: usize,
    pub abstain_count: usize,
    pub overall: Prf1Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapResult>,
    /// Per-register rows, present when the gold file carries registers.
    pub per_register: Vec<(String, Prf1Report)>,
    /// Per-role partial-match span rows (span-level gold only).
    pub span_roles: Vec<(String, SpanF1Report)>,
}

fn alignment_error(missing_preds: &BTreeSet<String>, extra_preds: &BTreeSet<String>) -> Error {
    let mut parts = Vec::new();
    if !missing_preds.is_empty() {
        parts.push(format!(
            "gold without prediction: {}",
            missing_preds
                .iter()
                .take(8)
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    if !extra_preds.is_empty() {
        parts.push(format!(
            "prediction without gold: {}",
            extra_preds
                .iter()
                .take(8)
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    Error::Alignment(parts.join("; "))
}

fn outcome_of(label: Label) -> Outcome {
    Outcome::from(label)
}

/// Sentence-level evaluation: align by source_id (both directions must
/// match), score metaphor-vs-rest.
pub fn eval_sentence(
    preds: &[PredRecord],
    gold: &[GoldInstance],
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    let mut by_id: BTreeMap<&str, Outcome> = BTreeMap::new();
    for p in preds {
        if p.target.kind != "sentence" {
            return Err(Error::Invalid(format!(
                "sentence-level eval got a {:?} target for {:?}",
                p.target.kind, p.source_id
            )));
        }
        let label = p.label_parsed()?;
        if by_id.insert(&p.source_id, outcome_of(label)).is_some() {
            return Err(Error::Invalid(format!(
                "duplicate prediction for {:?}",
                p.source_id
            )));
        }
    }
    let gold_ids: BTreeSet<String> = gold.iter().map(|g| g.source_id.clone()).collect();
    let pred_ids: BTreeSet<String> = by_id.keys().map(|s| s.to_string()).collect();
    let missing: BTreeSet<String> = gold_ids.difference(&pred_ids).cloned().collect();
    let extra: BTreeSet<String> = pred_ids.difference(&gold_ids).cloned().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(alignment_error(&missing, &extra));
    }

    let mut outcomes = Vec::with_capacity(gold.len());
    let mut truths = Vec::with_capacity(gold.len());
    let mut registers: Vec<Option<&str>> = Vec::with_capacity(gold.len());
    for g in gold {
        outcomes.push(by_id[g.source_id.as_str()]);
        truths.push(g.sentence_label == Some(SentenceLabel::Metaphor));
        registers.push(g.register.as_deref());
    }
    build_report(LabelType::Sentence, outcomes, truths, registers, iterations, seed, Vec::new())
}

/// Token-level evaluation with boundary alignment: each predicted token
/// counts against the gold token its char span maximally overlaps, ties
/// to the earlier gold token. A gold token is predicted positive when
/// any mapped prediction is positive; all-abstain mappings abstain; gold
/// tokens nothing maps to count as negative predictions.
pub fn eval_token(
    preds: &[PredRecord],
    gold: &[GoldInstance],
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    let mut by_id: BTreeMap<&str, Vec<&PredRecord>> = BTreeMap::new();
    for p in preds {
        if p.target.kind != "token" {
            return Err(Error::Invalid(format!(
                "token-level eval got a {:?} target for {:?}",
                p.target.kind, p.source_id
            )));
        }
        by_id.entry(&p.source_id).or_default().push(p);
    }
    let gold_ids: BTreeSet<String> = gold.iter().map(|g| g.source_id.clone()).collect();
    let pred_ids: BTreeSet<String> = by_id.keys().map(|s| s.to_string()).collect();
    let extra: BTreeSet<String> = pred_ids.difference(&gold_ids).cloned().collect();
    // Gold instances with no predictions at all are fine only if they
    // have no content to predict; requiring presence both ways keeps
    // silent drops visible.
    let missing: BTreeSet<String> = gold_ids.difference(&pred_ids).cloned().collect();
    if !extra.is_empty() || !missing.is_empty() {
        return Err(alignment_error(&missing, &extra));
    }

    let mut outcomes = Vec::new();
    let mut truths = Vec::new();
    let mut registers = Vec::new();
    for g in gold {
        let spans = g.token_spans().ok_or_else(|| {
            Error::SchemaMismatch(format!("instance {:?} is not token-labeled", g.source_id))
        })?;
        let labels = g.token_labels.as_ref().expect("validated token instance");
        // Outcomes mapped onto each gold token.
        let mut mapped: Vec<Vec<Outcome>> = vec![Vec::new(); spans.len()];
        for p in &by_id[g.source_id.as_str()] {
            let outcome = outcome_of(p.label_parsed()?);
            let gold_idx = match (p.target.span, p.target.index) {
                (Some(span), _) => best_overlap(&spans, &span).ok_or_else(|| {
                    Error::Alignment(format!(
                        "prediction span [{}, {}) overlaps no gold token of {:?}",
                        span.start, span.end, g.source_id
                    ))
                })?,
                (None, Some(i)) if i < spans.len() => i,
                _ => {
                    return Err(Error::Alignment(format!(
                        "prediction for {:?} has neither a usable span nor index",
                        g.source_id
                    )))
                }
            };
            mapped[gold_idx].push(outcome);
        }
        for (i, preds_here) in mapped.iter().enumerate() {
            let outcome = if preds_here.iter().any(|&o| o == Outcome::Positive) {
                Outcome::Positive
            } else if !preds_here.is_empty()
                && preds_here.iter().all(|&o| o == Outcome::Abstain)
            {
                Outcome::Abstain
            } else {
                Outcome::Negative
            };
            outcomes.push(outcome);
            truths.push(labels[i] == TokenLabel::Mrw);
            registers.push(g.register.as_deref());
        }
    }
    build_report(LabelType::Token, outcomes, truths, registers, iterations, seed, Vec::new())
}

/// Gold token index with maximal char overlap; ties to the earlier one.
fn best_overlap(gold_spans: &[CharSpan], pred: &CharSpan) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, g) in gold_spans.iter().enumerate() {
        let lo = g.start.max(pred.start);
        let hi = g.end.min(pred.end);
        let overlap = hi.saturating_sub(lo);
        if overlap > 0 {
            let better = match best {
                None => true,
                Some((_, best_overlap)) => overlap > best_overlap,
            };
            if better {
                best = Some((i, overlap));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Span-level evaluation: binary classification from the sentence
/// labels plus partial-match span F1 per role over the located spans.
pub fn eval_span(
    preds: &[PredRecord],
    gold: &[GoldInstance],
    criterion: MatchCriterion,
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    // Classification part aligns like sentence-level.
    let mut report = eval_sentence(preds, gold, iterations, seed)?;
    report.level = LabelType::Span;

    let by_id: BTreeMap<&str, &PredRecord> =
        preds.iter().map(|p| (p.source_id.as_str(), p)).collect();
    let mut span_roles = Vec::new();
    for role in [SpanRole::Tenor, SpanRole::Vehicle] {
        let role_name = match role {
            SpanRole::Tenor => "tenor",
            SpanRole::Vehicle => "vehicle",
            _ => unreachable!(),
        };
        let mut instances = Vec::new();
        let mut gold_has_role = false;
        for g in gold {
            let gold_spans: Vec<CharSpan> = g
                .spans
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .filter(|s| s.role == role)
                .filter_map(|s| s.span)
                .collect();
            if !gold_spans.is_empty() {
                gold_has_role = true;
            }
            let pred_spans: Vec<CharSpan> = by_id
                .get(g.source_id.as_str())
                .and_then(|p| p.spans.as_ref())
                .map(|spans| {
                    spans
                        .iter()
                        .filter(|s| s.role == role_name)
                        .map(|s| CharSpan::new(s.start, s.end))
                        .collect()
                })
                .unwrap_or_default();
            instances.push((pred_spans, gold_spans));
        }
        if gold_has_role {
            span_roles.push((
                role_name.to_string(),
                span_partial_f1_micro(&instances, criterion)?,
            ));
        }
    }
    report.span_roles = span_roles;
    Ok(report)
}

fn build_report(
    level: LabelType,
    outcomes: Vec<Outcome>,
    truths: Vec<bool>,
    registers: Vec<Option<&str>>,
    iterations: usize,
    seed: u64,
    span_roles: Vec<(String, SpanF1Report)>,
) -> Result<EvalReport> {
    let overall = prf1(&outcomes, &truths)?;
    let bootstrap = if iterations > 0 && !outcomes.is_empty() {
        Some(bootstrap_f1(&outcomes, &truths, iterations, seed)?)
    } else {
        None
    };

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, reg) in registers.iter().enumerate() {
        if let Some(reg) = reg {
            groups.entry(reg).or_default().push(i);
        }
    }
    let mut per_register = Vec::new();
    for (reg, idx) in groups {
        let o: Vec<Outcome> = idx.iter().map(|&i| outcomes[i]).collect();
        let t: Vec<bool> = idx.iter().map(|&i| truths[i]).collect();
        per_register.push((reg.to_string(), prf1(&o, &t)?));
    }

    Ok(EvalReport {
        level,
        compared: outcomes.len(),
        abstain_count: overall.abstain_count,
        overall,
        bootstrap,
        per_register,
        span_roles,
    })
}

/// Cross-run comparison on aligned prediction files. ABSTAIN is treated
/// as the negative label for agreement (consistent with scoring) and
/// tallied per run.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub matrix: KappaMatrix,
    pub compared: usize,
    pub abstains: Vec<(String, usize)>,
}

pub fn compare_runs(runs: &[(String, Vec<PredRecord>)]) -> Result<CompareReport> {
    if runs.len() < 2 {
        return Err(Error::Invalid(
            "compare needs at least two prediction files".to_string(),
        ));
    }
    type Key = (String, String, Option<usize>);
    let mut keyed: Vec<(String, BTreeMap<Key, Label>, usize)> = Vec::new();
    for (name, preds) in runs {
        let mut map = BTreeMap::new();
        let mut abstains = 0;
        for p in preds {
            let label = p.label_parsed()?;
            if label == Label::Abstain {
                abstains += 1;
            }
            let key = (p.source_id.clone(), p.target.kind.clone(), p.target.index);
            if map.insert(key, label).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate prediction in {name:?} for {:?}",
                    p.source_id
                )));
            }
        }
        keyed.push((name.clone(), map, abstains));
    }
    let reference: Vec<Key> = keyed[0].1.keys().cloned().collect();
    for (name, map, _) in &keyed {
        if map.len() != reference.len() || !reference.iter().all(|k| map.contains_key(k)) {
            let missing: Vec<String> = reference
                .iter()
                .filter(|k| !map.contains_key(*k))
                .take(8)
                .map(|k| format!("{}/{}", k.0, k.1))
                .collect();
            return Err(Error::Alignment(format!(
                "run {name:?} does not align with the first run: {}",
                missing.join(", ")
            )));
        }
    }

    let labeled: Vec<(String, Vec<&'static str>)> = keyed
        .iter()
        .map(|(name, map, _)| {
            let labels = reference
                .iter()
                .map(|k| match map[k] {
                    Label::Metaphorical => "METAPHORICAL",
                    // Negative prediction either way.
                    Label::Literal | Label::Abstain => "LITERAL",
                })
                .collect();
            (name.clone(), labels)
        })
        .collect();
    let matrix = kappa_matrix(&labeled)?;
    Ok(CompareReport {
        matrix,
        compared: reference.len(),
        abstains: keyed
            .into_iter()
            .map(|(name, _, abstains)| (name, abstains))
            .collect(),
    })
}
