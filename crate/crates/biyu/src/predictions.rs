//! Prediction interchange format: one JSON object per line with
//! `{label, source_id, spans?, target}`, written canonically (sorted
//! keys) so prediction files are byte-reproducible. Third-party systems
//! can be scored by emitting the same lines.

use std::path::Path;

use biyu_core::canon::Value;
use biyu_core::protocol::{Evidence, Label, RunRecord, Target};
use biyu_core::textprep::CharSpan;

use crate::error::{Error, Result};

/// One prediction row.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct PredRecord {
    pub source_id: String,
    pub target: PredTarget,
    pub label: String,
    /// Extracted evidence spans (tenor/vehicle) for span-level scoring.
    #[serde(default)]
    pub spans: Option<Vec<PredSpan>>,
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct PredTarget {
    pub kind: String,
    #[serde(default)]
    pub index: Option<usize>,
    /// Char span of the predicted token in the (normalized) text;
    /// used to align against gold tokenizations.
    #[serde(default)]
    pub span: Option<CharSpan>,
}

#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct PredSpan {
    pub role: String,
    pub start: usize,
    pub end: usize,
}

impl PredRecord {
    pub fn label_parsed(&self) -> Result<Label> {
        Label::parse(&self.label)
            .ok_or_else(|| Error::Invalid(format!("unknown prediction label {:?}", self.label)))
    }
}

/// Evidence spans worth exporting for span-level evaluation.
fn evidence_spans(evidence: &Evidence) -> Vec<(&'static str, CharSpan)> {
    match evidence {
        Evidence::ConceptMapping {
            triple: Some(t), ..
        } => vec![("tenor", t.tenor), ("vehicle", t.vehicle)],
        Evidence::Comparison {
            construct: Some(c), ..
        } => vec![("tenor", c.tenor), ("vehicle", c.vehicle)],
        _ => Vec::new(),
    }
}

fn record_line(record: &RunRecord, token_span: Option<CharSpan>) -> String {
    let target = match record.decision.target {
        Target::Token(i) => {
            let mut entries = vec![
                ("index", Value::Int(i as i64)),
                ("kind", Value::string("token")),
            ];
            if let Some(span) = token_span {
                entries.push((
                    "span",
                    Value::Array(vec![
                        Value::Int(span.start as i64),
                        Value::Int(span.end as i64),
                    ]),
                ));
            }
            Value::object(entries)
        }
        Target::Sentence => Value::object([("kind", Value::string("sentence"))]),
    };
    let mut fields = vec![
        ("label", Value::string(record.decision.label.as_str())),
        ("source_id", Value::string(record.source_id.clone())),
        ("target", target),
    ];
    let spans = evidence_spans(&record.rationale.evidence);
    if !spans.is_empty() {
        fields.push((
            "spans",
            Value::Array(
                spans
                    .into_iter()
                    .map(|(role, span)| {
                        Value::object([
                            ("end", Value::Int(span.end as i64)),
                            ("role", Value::string(role)),
                            ("start", Value::Int(span.start as i64)),
                        ])
                    })
                    .collect(),
            ),
        ));
    }
    Value::object(fields).to_canonical_string()
}

/// Serializes prediction lines for run records. `token_span_of` supplies
/// the char span of token targets (from the run's own tokenization).
pub fn render_predictions<F>(records: &[RunRecord], mut token_span_of: F) -> String
where
    F: FnMut(&RunRecord) -> Option<CharSpan>,
{
    let mut out = String::new();
    for record in records {
        let span = token_span_of(record);
        out.push_str(&record_line(record, span));
        out.push('\n');
    }
    out
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
