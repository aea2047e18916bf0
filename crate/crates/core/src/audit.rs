//! Interpretability audit primitives: determinism replay and rationale
//! correctness scoring.
//!
//! The worksheet export and the config-patch editability trials live in
//! the companion crate (they are file-format work); the checks here are
//! pure given a gateway.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::protocol::{
    run_protocol, serialize_rationales, ProtocolConfig, ProtocolId, ProtocolResources, RunRecord,
};
use crate::textprep::Sentence;

/// Outcome of executing a protocol twice over the same instances and
/// byte-comparing the serialized rationales per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminismReport {
    pub protocol: ProtocolId,
    pub instances_compared: usize,
    pub identical: usize,
    pub fraction: f64,
    /// Source ids whose two serializations differed.
    pub mismatched: Vec<String>,
}

/// Runs the protocol twice over `sentences`, obtaining a gateway for
/// each pass from `gateway_for_pass` (pass index 0, then 1), and
/// compares the canonical per-instance serializations byte-wise. An
/// empty instance set is vacuously deterministic (fraction 1.0).
pub fn determinism_check<'g, G>(
    config: &ProtocolConfig,
    resources: &ProtocolResources,
    sentences: &[Sentence],
    mut gateway_for_pass: G,
) -> DeterminismReport
where
    G: FnMut(usize) -> crate::gateway::Gateway<'g>,
{
    let mut passes: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for (pass, bytes) in passes.iter_mut().enumerate() {
        let gateway = gateway_for_pass(pass);
        for sentence in sentences {
            let run = run_protocol(config, resources, sentence, &gateway);
            let records: Vec<RunRecord> = run
                .decisions
                .into_iter()
                .zip(run.rationales)
                .map(|(decision, rationale)| RunRecord {
                    source_id: sentence.source_id.clone(),
                    protocol_id: config.protocol,
                    config_version: config.version.clone(),
                    decision,
                    rationale,
                })
                .collect();
            bytes.push(serialize_rationales(&records));
        }
    }
    let mut identical = 0;
    let mut mismatched = Vec::new();
    for (i, sentence) in sentences.iter().enumerate() {
        if passes[0][i] == passes[1][i] {
            identical += 1;
        } else {
            mismatched.push(sentence.source_id.clone());
        }
    }
    let instances_compared = sentences.len();
    DeterminismReport {
        protocol: config.protocol,
        instances_compared,
        identical,
        fraction: if instances_compared == 0 {
            1.0
        } else {
            identical as f64 / instances_compared as f64
        },
        mismatched,
    }
}

/// Human verdict on one rationale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Correct,
    PartiallyCorrect,
    Incorrect,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::PartiallyCorrect => "partially_correct",
            Verdict::Incorrect => "incorrect",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        match s {
            "correct" => Some(Verdict::Correct),
            "partially_correct" => Some(Verdict::PartiallyCorrect),
            "incorrect" => Some(Verdict::Incorrect),
            _ => None,
        }
    }

    fn score(self) -> f64 {
        match self {
            Verdict::Correct => 1.0,
            Verdict::PartiallyCorrect => 0.5,
            Verdict::Incorrect => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationaleJudgment {
    /// Which decision the judgment is about (e.g. "s3#token2").
    pub decision_ref: String,
    pub verdict: Verdict,
    pub judge_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyJudgments;

impl fmt::Display for EmptyJudgments {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no judgments to score")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EmptyJudgments {}

/// Rationale correctness: the proportion judged correct, with partially
/// correct weighted 0.5. Rows judged by several judges are averaged per
/// row first.
pub fn score_rationales(judgments: &[RationaleJudgment]) -> Result<f64, EmptyJudgments> {
    if judgments.is_empty() {
        return Err(EmptyJudgments);
    }
    let mut per_row: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for j in judgments {
        let slot = per_row.entry(j.decision_ref.as_str()).or_insert((0.0, 0));
        slot.0 += j.verdict.score();
        slot.1 += 1;
    }
    let rows = per_row.len() as f64;
    let sum: f64 = per_row
        .values()
        .map(|(total, count)| total / *count as f64)
        .sum();
    Ok(sum / rows)
}
