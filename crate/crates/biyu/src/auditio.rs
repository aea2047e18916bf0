//! Audit file work: the rationale-judgment worksheet and the config
//! editability trial.
//!
//! Worksheets are CSV with the fixed header
//! `source_id,protocol,decision,rationale,verdict,judge_id`; the verdict
//! column accepts exactly `correct`, `partially_correct`, or
//! `incorrect`, so human judgments round-trip losslessly.

use std::path::Path;

use biyu_core::audit::{RationaleJudgment, Verdict};
use biyu_core::dataset::{sample, GoldInstance, LabelType};
use biyu_core::gateway::Gateway;
use biyu_core::protocol::{Label, ProtocolConfig, ProtocolResources, RunRecord, Target};
use biyu_core::textprep::Lexicon;

use crate::configio::{apply_patch, ConfigPatchFile};
use crate::error::{Error, Result};
use crate::evalio::{eval_sentence, eval_token};
use crate::predictions::{PredRecord, PredTarget};
use crate::runner::{run_dataset, DatasetRun};

pub const WORKSHEET_HEADER: [&str; 6] = [
    "source_id",
    "protocol",
    "decision",
    "rationale",
    "verdict",
    "judge_id",
];

fn target_token(target: &serde_json::Value) -> String {
    match target.get("kind").and_then(|k| k.as_str()) {
        Some("token") => format!(
            "token:{}",
            target.get("index").and_then(|i| i.as_u64()).unwrap_or(0)
        ),
        _ => "sentence".to_string(),
    }
}

/// Compact, deterministic one-line rendering of an evidence object:
/// keys in sorted order, scalars inline, spans as `[s,e]`.
fn summarize_evidence(evidence: &serde_json::Value) -> String {
    let Some(map) = evidence.as_object() else {
        return evidence.to_string();
    };
    let mut parts = Vec::new();
    for (k, v) in map {
        if k == "type" {
            continue;
        }
        let rendered = match v {
            serde_json::Value::Null => continue,
            serde_json::Value::String(s) if s.is_empty() => continue,
            serde_json::Value::Object(_) => summarize_evidence(v),
            other => other.to_string(),
        };
        parts.push(format!("{k}={rendered}"));
    }
    parts.join(" ")
}

/// Exports an audit worksheet: a deterministic `n`-row sample of the
/// records in a rationale file, with blank verdict and judge columns.
pub fn export_worksheet(
    rationales_path: &Path,
    n: usize,
    seed: u64,
    out_path: &Path,
) -> Result<usize> {
    let text =
        std::fs::read_to_string(rationales_path).map_err(|e| Error::io(rationales_path, e))?;
    let records: Vec<serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: rationales_path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })?;
    let picked = sample(&records, n, seed)
        .map_err(|e| Error::Invalid(e.to_string()))?;

    let mut writer = csv::Writer::from_path(out_path).map_err(|e| Error::Invalid(e.to_string()))?;
    writer
        .write_record(WORKSHEET_HEADER)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    for rec in &picked {
        let source_id = rec["source_id"].as_str().unwrap_or("").to_string();
        let protocol = rec["protocol_id"].as_str().unwrap_or("").to_string();
        let decision = format!(
            "{} {}",
            target_token(&rec["target"]),
            rec["label"].as_str().unwrap_or("")
        );
        let rationale = format!(
            "step={} type={} {}",
            rec["triggering_step"].as_str().unwrap_or(""),
            rec["evidence"]["type"].as_str().unwrap_or(""),
            summarize_evidence(&rec["evidence"])
        );
        writer
            .write_record([&source_id, &protocol, &decision, &rationale, "", ""])
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(out_path, e))?;
    Ok(picked.len())
}

/// Reads judged worksheet rows back. Rows with an empty verdict are
/// skipped (not yet judged); anything else must be one of the three
/// verdict tokens.
pub fn read_worksheet(path: &Path) -> Result<Vec<RationaleJudgment>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line,
            reason: e.to_string(),
        })?;
        if row.len() < 6 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                reason: format!("expected 6 columns, got {}", row.len()),
            });
        }
        let verdict_text = row[4].trim();
        if verdict_text.is_empty() {
            continue;
        }
        let verdict = Verdict::parse(verdict_text).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line,
            reason: format!("unknown verdict {verdict_text:?}"),
        })?;
        let target = row[2].split_whitespace().next().unwrap_or("sentence");
        out.push(RationaleJudgment {
            decision_ref: format!("{}#{}", &row[0], target),
            verdict,
            judge_id: row[5].trim().to_string(),
        });
    }
    Ok(out)
}

/// Result of one editability trial.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EditTrialReport {
    pub base_version: String,
    pub patched_version: String,
    pub targeted: Vec<String>,
    pub targeted_changed: bool,
    pub f1_before: f64,
    pub f1_after: f64,
    pub tolerance: f64,
    /// Targeted decisions changed without degrading overall F1 beyond
    /// the tolerance.
    pub success: bool,
}

fn labels_by_key(run: &DatasetRun) -> Vec<(String, Target, Label)> {
    run.records
        .iter()
        .map(|r| (r.source_id.clone(), r.decision.target, r.decision.label))
        .collect()
}

fn records_to_preds(run: &DatasetRun) -> Vec<PredRecord> {
    run.records
        .iter()
        .map(|r: &RunRecord| PredRecord {
            source_id: r.source_id.clone(),
            target: match r.decision.target {
                Target::Token(i) => PredTarget {
                    kind: "token".into(),
                    index: Some(i),
                    span: run.token_spans.get(&(r.source_id.clone(), i)).copied(),
                },
                Target::Sentence => PredTarget {
                    kind: "sentence".into(),
                    index: None,
                    span: None,
                },
            },
            label: r.decision.label.as_str().to_string(),
            spans: None,
        })
        .collect()
}

fn overall_f1(
    run: &DatasetRun,
    instances: &[GoldInstance],
    label_type: LabelType,
) -> Result<f64> {
    let preds = records_to_preds(run);
    let report = match label_type {
        LabelType::Token => eval_token(&preds, instances, 0, 0)?,
        LabelType::Sentence | LabelType::Span => eval_sentence(&preds, instances, 0, 0)?,
    };
    Ok(report.overall.f1)
}

/// Applies a config patch, reruns the full set under both configs, and
/// reports whether the targeted decisions changed and what happened to
/// overall F1. The gateway closure is invoked once per pass (0 =
/// before, 1 = after).
#[allow(clippy::too_many_arguments)]
pub fn editability_trial<'g, G>(
    config: &ProtocolConfig,
    patch: &ConfigPatchFile,
    targeted: &[String],
    instances: &[GoldInstance],
    label_type: LabelType,
    lexicon: &Lexicon,
    resources: &ProtocolResources,
    tolerance: f64,
    mut gateway_for_pass: G,
) -> Result<EditTrialReport>
where
    G: FnMut(usize) -> Gateway<'g>,
{
    let patched = apply_patch(config, patch)?;
    let before = run_dataset(
        config,
        resources,
        instances,
        label_type,
        lexicon,
        &gateway_for_pass(0),
    )?;
    let after = run_dataset(
        &patched,
        resources,
        instances,
        label_type,
        lexicon,
        &gateway_for_pass(1),
    )?;

    let before_labels = labels_by_key(&before);
    let after_labels = labels_by_key(&after);
    let targeted_changed = targeted.iter().any(|id| {
        let b: Vec<_> = before_labels.iter().filter(|(s, _, _)| s == id).collect();
        let a: Vec<_> = after_labels.iter().filter(|(s, _, _)| s == id).collect();
        b != a
    });

    let f1_before = overall_f1(&before, instances, label_type)?;
    let f1_after = overall_f1(&after, instances, label_type)?;
    let success = targeted_changed && f1_after >= f1_before - tolerance;
    Ok(EditTrialReport {
        base_version: config.version.clone(),
        patched_version: patched.version.clone(),
        targeted: targeted.to_vec(),
        targeted_changed,
        f1_before,
        f1_after,
        tolerance,
        success,
    })
}
