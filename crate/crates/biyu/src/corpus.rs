//! Corpus loading: the unified JSON-lines schema plus one import
//! adapter per supported corpus layout.
//!
//! The unified file has one [`GoldInstance`] JSON object per line.
//! Import adapters convert a corpus's native layout into that schema
//! once; the expected native layouts are documented on each adapter
//! (the upstream distributions vary, so adapters target the simplest
//! faithful rendering of each corpus's fields). Imported token- and
//! span-annotated text must already be normalization-stable: offsets
//! into text the normalizer would change cannot be trusted, so that is
//! an import error rather than a silent shift.

use std::path::Path;

use biyu_core::dataset::{
    DatasetName, GoldInstance, GoldSpan, LabelType, SentenceLabel, SpanRole, TokenLabel,
};
use biyu_core::textprep::{normalize, CharSpan};

use crate::error::{Error, Result};

/// Descriptor tying a dataset name to a concrete file. The label type
/// always comes from the name.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub label_type: LabelType,
    pub path: String,
}

impl DatasetDescriptor {
    pub fn new(name: DatasetName, path: &Path) -> DatasetDescriptor {
        DatasetDescriptor {
            name: name.as_str().to_string(),
            label_type: name.label_type(),
            path: path.display().to_string(),
        }
    }

    /// Descriptor for an ad-hoc unified file with an explicit label
    /// type (fixtures, demo corpora).
    pub fn adhoc(label_type: LabelType, path: &Path) -> DatasetDescriptor {
        DatasetDescriptor {
            name: format!("adhoc-{}", label_type.as_str()),
            label_type,
            path: path.display().to_string(),
        }
    }
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

/// Loads a unified JSON-lines corpus, validating every instance against
/// the label type. Order is preserved.
pub fn load_unified(path: &Path, label_type: LabelType) -> Result<Vec<GoldInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let inst: GoldInstance = serde_json::from_str(line)
            .map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        inst.validate(label_type).map_err(|e| {
            Error::SchemaMismatch(format!(
                "{} line {}: {} (expected {} labels)",
                path.display(),
                i + 1,
                e,
                label_type.as_str()
            ))
        })?;
        out.push(inst);
    }
    Ok(out)
}

/// Writes instances as unified JSON-lines.
pub fn save_unified(path: &Path, instances: &[GoldInstance]) -> Result<()> {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&serde_json::to_string(inst).expect("instance serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Converts a corpus from its native layout into unified instances.
pub fn import(name: DatasetName, path: &Path) -> Result<Vec<GoldInstance>> {
    let instances = match name {
        DatasetName::PsuCmc => import_psu_cmc(path)?,
        DatasetName::Cmc => import_cmc(path)?,
        DatasetName::Cmdag => import_cmdag(path)?,
        DatasetName::ChineseSimile => import_chinese_simile(path)?,
        DatasetName::Nlpcc2024T9 => import_nlpcc_t9(path)?,
        DatasetName::Configure => import_configure(path)?,
        DatasetName::ChineseMCorpus => import_chinese_mcorpus(path)?,
    };
    let label_type = name.label_type();
    for inst in &instances {
        if label_type != LabelType::Sentence && normalize(&inst.text) != inst.text {
            return Err(Error::SchemaMismatch(format!(
                "instance {:?}: text is not normalization-stable; offsets would shift",
                inst.source_id
            )));
        }
        inst.validate(label_type)
            .map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    }
    Ok(instances)
}

/// PSU CMC native layout: CoNLL-style token blocks.
///
/// ```text
/// # id = psu-0001
/// # register = news
/// 他	literal
/// 的	literal
/// 话	MRW
///
/// # id = psu-0002
/// ...
/// ```
fn import_psu_cmc(path: &Path) -> Result<Vec<GoldInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut id: Option<String> = None;
    let mut register: Option<String> = None;
    let mut tokens: Vec<String> = Vec::new();
    let mut labels: Vec<TokenLabel> = Vec::new();

    let mut flush = |id: &mut Option<String>,
                     register: &mut Option<String>,
                     tokens: &mut Vec<String>,
                     labels: &mut Vec<TokenLabel>,
                     line_no: usize|
     -> Result<()> {
        if tokens.is_empty() {
            *id = None;
            *register = None;
            return Ok(());
        }
        let source_id = id
            .take()
            .ok_or_else(|| parse_err(path, line_no, "token block without `# id =` header"))?;
        out.push(GoldInstance {
            source_id,
            text: tokens.concat(),
            register: register.take(),
            tokens: Some(std::mem::take(tokens)),
            token_labels: Some(std::mem::take(labels)),
            sentence_label: None,
            spans: None,
        });
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            flush(&mut id, &mut register, &mut tokens, &mut labels, line_no)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix("# id =") {
            id = Some(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("# register =") {
            register = Some(rest.trim().to_string());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (surface, label) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, line_no, "expected token<TAB>label"))?;
        let label = match label.trim() {
            "MRW" => TokenLabel::Mrw,
            "literal" => TokenLabel::Literal,
            "MFlag" => TokenLabel::MFlag,
            other => return Err(parse_err(path, line_no, format!("unknown label {other:?}"))),
        };
        tokens.push(surface.to_string());
        labels.push(label);
    }
    let last_line = text.lines().count();
    flush(&mut id, &mut register, &mut tokens, &mut labels, last_line)?;
    Ok(out)
}

fn sentence_label_of(path: &Path, line: usize, s: &str) -> Result<SentenceLabel> {
    match s.trim() {
        "metaphor" => Ok(SentenceLabel::Metaphor),
        "literal" => Ok(SentenceLabel::Literal),
        "other" => Ok(SentenceLabel::Other),
        other => Err(parse_err(path, line, format!("unknown label {other:?}"))),
    }
}

/// CMC native layout: CSV with header `id,text,label`.
fn import_cmc(path: &Path) -> Result<Vec<GoldInstance>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line_no = i + 2;
        let row = row.map_err(|e| parse_err(path, line_no, e.to_string()))?;
        if row.len() < 3 {
            return Err(parse_err(path, line_no, "expected id,text,label"));
        }
        out.push(GoldInstance {
            source_id: row[0].to_string(),
            text: normalize(&row[1]),
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(sentence_label_of(path, line_no, &row[2])?),
            spans: None,
        });
    }
    Ok(out)
}

fn json_lines(path: &Path) -> Result<Vec<(usize, serde_json::Value)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        out.push((i + 1, v));
    }
    Ok(out)
}

fn str_field(path: &Path, line: usize, v: &serde_json::Value, key: &str) -> Result<String> {
    v.get(key)
        .and_then(|x| x.as_str())
        .map(String::from)
        .ok_or_else(|| parse_err(path, line, format!("missing string field {key:?}")))
}

fn span_field(
    path: &Path,
    line: usize,
    v: &serde_json::Value,
    key: &str,
) -> Result<Option<CharSpan>> {
    match v.get(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::Array(a)) if a.len() == 2 => {
            let start = a[0].as_u64().ok_or_else(|| {
                parse_err(path, line, format!("{key:?} start is not an integer"))
            })? as usize;
            let end = a[1]
                .as_u64()
                .ok_or_else(|| parse_err(path, line, format!("{key:?} end is not an integer")))?
                as usize;
            Ok(Some(CharSpan::new(start, end)))
        }
        Some(_) => Err(parse_err(path, line, format!("{key:?} must be [start, end]"))),
    }
}

/// CMDAG native layout: JSON lines
/// `{"id", "text", "tenor": [s,e], "vehicle": [s,e], "ground": "..."}`.
/// Every instance is a metaphor; the ground is free text (often
/// implicit).
fn import_cmdag(path: &Path) -> Result<Vec<GoldInstance>> {
    let mut out = Vec::new();
    for (line, v) in json_lines(path)? {
        let mut spans = Vec::new();
        if let Some(span) = span_field(path, line, &v, "tenor")? {
            spans.push(GoldSpan {
                role: SpanRole::Tenor,
                span: Some(span),
                text: None,
            });
        }
        if let Some(span) = span_field(path, line, &v, "vehicle")? {
            spans.push(GoldSpan {
                role: SpanRole::Vehicle,
                span: Some(span),
                text: None,
            });
        }
        if let Some(g) = v.get("ground").and_then(|x| x.as_str()) {
            if !g.is_empty() {
                spans.push(GoldSpan {
                    role: SpanRole::Ground,
                    span: None,
                    text: Some(g.to_string()),
                });
            }
        }
        out.push(GoldInstance {
            source_id: str_field(path, line, &v, "id")?,
            text: str_field(path, line, &v, "text")?,
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(SentenceLabel::Metaphor),
            spans: Some(spans),
        });
    }
    Ok(out)
}

/// Chinese Simile native layout: JSON lines
/// `{"id", "text", "is_simile": bool, "tenor": [s,e]?, "vehicle": [s,e]?}`.
fn import_chinese_simile(path: &Path) -> Result<Vec<GoldInstance>> {
    let mut out = Vec::new();
    for (line, v) in json_lines(path)? {
        let is_simile = v
            .get("is_simile")
            .and_then(|x| x.as_bool())
            .ok_or_else(|| parse_err(path, line, "missing bool field \"is_simile\""))?;
        let mut spans = Vec::new();
        for (key, role) in [("tenor", SpanRole::Tenor), ("vehicle", SpanRole::Vehicle)] {
            if let Some(span) = span_field(path, line, &v, key)? {
                spans.push(GoldSpan {
                    role,
                    span: Some(span),
                    text: None,
                });
            }
        }
        out.push(GoldInstance {
            source_id: str_field(path, line, &v, "id")?,
            text: str_field(path, line, &v, "text")?,
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(if is_simile {
                SentenceLabel::Metaphor
            } else {
                SentenceLabel::Literal
            }),
            spans: Some(spans),
        });
    }
    Ok(out)
}

/// NLPCC 2024 task-9 native layout: JSON lines
/// `{"id", "text", "source_domain": "...", "target_domain": "..."}`.
/// Domains are free text; every instance is a metaphor.
fn import_nlpcc_t9(path: &Path) -> Result<Vec<GoldInstance>> {
    let mut out = Vec::new();
    for (line, v) in json_lines(path)? {
        let mut spans = Vec::new();
        for (key, role) in [
            ("source_domain", SpanRole::SourceDomain),
            ("target_domain", SpanRole::TargetDomain),
        ] {
            let text = str_field(path, line, &v, key)?;
            spans.push(GoldSpan {
                role,
                span: None,
                text: Some(text),
            });
        }
        out.push(GoldInstance {
            source_id: str_field(path, line, &v, "id")?,
            text: str_field(path, line, &v, "text")?,
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(SentenceLabel::Metaphor),
            spans: Some(spans),
        });
    }
    Ok(out)
}

/// ConFiguRe native layout: JSON lines
/// `{"id", "text", "figure": "metaphor|simile|personification|...|none",
///   "unit": [s,e]?}`. Metaphor maps to the positive label, `none` to
/// literal, and every other figure to `other`.
fn import_configure(path: &Path) -> Result<Vec<GoldInstance>> {
    let mut out = Vec::new();
    for (line, v) in json_lines(path)? {
        let figure = str_field(path, line, &v, "figure")?;
        let label = match figure.as_str() {
            "metaphor" => SentenceLabel::Metaphor,
            "none" => SentenceLabel::Literal,
            _ => SentenceLabel::Other,
        };
        let mut spans = Vec::new();
        if let Some(span) = span_field(path, line, &v, "unit")? {
            spans.push(GoldSpan {
                role: SpanRole::Figure,
                span: Some(span),
                text: Some(figure.clone()),
            });
        }
        out.push(GoldInstance {
            source_id: str_field(path, line, &v, "id")?,
            text: str_field(path, line, &v, "text")?,
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(label),
            spans: Some(spans),
        });
    }
    Ok(out)
}

/// ChineseMCorpus native layout: TSV lines `id<TAB>label<TAB>text`.
fn import_chinese_mcorpus(path: &Path) -> Result<Vec<GoldInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let id = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(path, line_no, "missing id"))?;
        let label = parts
            .next()
            .ok_or_else(|| parse_err(path, line_no, "missing label"))?;
        let body = parts
            .next()
            .ok_or_else(|| parse_err(path, line_no, "missing text"))?;
        out.push(GoldInstance {
            source_id: id.to_string(),
            text: normalize(body),
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(sentence_label_of(path, line_no, label)?),
            spans: None,
        });
    }
    Ok(out)
}
