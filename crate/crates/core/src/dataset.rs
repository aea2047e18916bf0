//! Unified instance model for the seven corpus schemas, dataset
//! statistics, the token-to-sentence label conversion rule, and
//! deterministic subset sampling.
//!
//! Native corpus layouts are converted once (by the companion crate's
//! import adapters) into this single model; everything downstream sees
//! one schema. Offsets are character indices into `text`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rng::SplitMix64;
use crate::textprep::CharSpan;

/// The seven supported corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetName {
    PsuCmc,
    Cmc,
    Cmdag,
    ChineseSimile,
    Nlpcc2024T9,
    Configure,
    ChineseMCorpus,
}

impl DatasetName {
    pub const ALL: [DatasetName; 7] = [
        DatasetName::PsuCmc,
        DatasetName::Cmc,
        DatasetName::Cmdag,
        DatasetName::ChineseSimile,
        DatasetName::Nlpcc2024T9,
        DatasetName::Configure,
        DatasetName::ChineseMCorpus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::PsuCmc => "PSU_CMC",
            DatasetName::Cmc => "CMC",
            DatasetName::Cmdag => "CMDAG",
            DatasetName::ChineseSimile => "CHINESE_SIMILE",
            DatasetName::Nlpcc2024T9 => "NLPCC2024_T9",
            DatasetName::Configure => "CONFIGURE",
            DatasetName::ChineseMCorpus => "CHINESE_MCORPUS",
        }
    }

    pub fn parse(s: &str) -> Option<DatasetName> {
        DatasetName::ALL.iter().copied().find(|d| d.as_str() == s)
    }

    /// Annotation granularity of the corpus.
    pub fn label_type(self) -> LabelType {
        match self {
            DatasetName::PsuCmc => LabelType::Token,
            DatasetName::Cmc => LabelType::Sentence,
            DatasetName::Cmdag => LabelType::Span,
            DatasetName::ChineseSimile => LabelType::Span,
            DatasetName::Nlpcc2024T9 => LabelType::Span,
            DatasetName::Configure => LabelType::Span,
            DatasetName::ChineseMCorpus => LabelType::Sentence,
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LabelType {
    Token,
    Sentence,
    Span,
}

impl LabelType {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelType::Token => "token",
            LabelType::Sentence => "sentence",
            LabelType::Span => "span",
        }
    }
}

/// Per-token gold label. MFlag marks signaled/implicit metaphor; it is
/// not a positive label for the sentence conversion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TokenLabel {
    #[cfg_attr(feature = "serde", serde(rename = "MRW"))]
    Mrw,
    #[cfg_attr(feature = "serde", serde(rename = "literal"))]
    Literal,
    #[cfg_attr(feature = "serde", serde(rename = "MFlag"))]
    MFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SentenceLabel {
    Metaphor,
    Literal,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpanRole {
    Tenor,
    Vehicle,
    Ground,
    SourceDomain,
    TargetDomain,
    Figure,
}

/// A gold span annotation: a located char span, free text, or both
/// (e.g. an implicit ground has text but no span).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldSpan {
    pub role: SpanRole,
    #[cfg_attr(feature = "serde", serde(default))]
    pub span: Option<CharSpan>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub text: Option<String>,
}

/// One unit of gold-annotated text in the unified schema. Exactly the
/// field group implied by the label type is present.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldInstance {
    pub source_id: String,
    pub text: String,
    /// Genre tag (academic / fiction / news) when the corpus has one.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub register: Option<String>,
    /// Token surfaces; concatenation equals `text`.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub tokens: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub token_labels: Option<Vec<TokenLabel>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub sentence_label: Option<SentenceLabel>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub spans: Option<Vec<GoldSpan>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceError {
    pub source_id: String,
    pub reason: String,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instance {:?}: {}", self.source_id, self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for InstanceError {}

impl GoldInstance {
    fn err(&self, reason: impl Into<String>) -> InstanceError {
        InstanceError {
            source_id: self.source_id.clone(),
            reason: reason.into(),
        }
    }

    /// Char spans of the gold tokens, derived from surface lengths.
    pub fn token_spans(&self) -> Option<Vec<CharSpan>> {
        let tokens = self.tokens.as_ref()?;
        let mut spans = Vec::with_capacity(tokens.len());
        let mut cursor = 0;
        for t in tokens {
            let len = t.chars().count();
            spans.push(CharSpan::new(cursor, cursor + len));
            cursor += len;
        }
        Some(spans)
    }

    /// Validates the invariants for the given label type: the implied
    /// field group present, the others absent, token cover exact, span
    /// offsets in bounds.
    pub fn validate(&self, label_type: LabelType) -> Result<(), InstanceError> {
        let text_chars = self.text.chars().count();
        match label_type {
            LabelType::Token => {
                let tokens = self
                    .tokens
                    .as_ref()
                    .ok_or_else(|| self.err("token-labeled instance missing tokens"))?;
                let labels = self
                    .token_labels
                    .as_ref()
                    .ok_or_else(|| self.err("token-labeled instance missing token_labels"))?;
                if tokens.len() != labels.len() {
                    return Err(self.err(alloc::format!(
                        "{} tokens vs {} labels",
                        tokens.len(),
                        labels.len()
                    )));
                }
                let joined: String = tokens.concat();
                if joined != self.text {
                    return Err(self.err("token surfaces do not concatenate to text"));
                }
                if self.sentence_label.is_some() || self.spans.is_some() {
                    return Err(self.err("token-labeled instance carries non-token fields"));
                }
            }
            LabelType::Sentence => {
                if self.sentence_label.is_none() {
                    return Err(self.err("sentence-labeled instance missing sentence_label"));
                }
                if self.tokens.is_some() || self.token_labels.is_some() || self.spans.is_some() {
                    return Err(self.err("sentence-labeled instance carries non-sentence fields"));
                }
            }
            LabelType::Span => {
                let spans = self
                    .spans
                    .as_ref()
                    .ok_or_else(|| self.err("span-labeled instance missing spans"))?;
                if self.sentence_label.is_none() {
                    return Err(self.err("span-labeled instance missing sentence_label"));
                }
                if self.tokens.is_some() || self.token_labels.is_some() {
                    return Err(self.err("span-labeled instance carries token fields"));
                }
                for s in spans {
                    if let Some(span) = &s.span {
                        if span.start >= span.end || span.end > text_chars {
                            return Err(self.err(alloc::format!(
                                "span [{}, {}) out of bounds for {} chars",
                                span.start,
                                span.end,
                                text_chars
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Aggregate label counts; the unit is tokens for token-labeled data and
/// instances otherwise.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStats {
    pub total: usize,
    pub metaphor: usize,
    pub literal: usize,
    pub other: usize,
    pub metaphor_pct: f64,
}

pub fn stats(instances: &[GoldInstance], label_type: LabelType) -> DatasetStats {
    let mut metaphor = 0;
    let mut literal = 0;
    let mut other = 0;
    match label_type {
        LabelType::Token => {
            for inst in instances {
                for label in inst.token_labels.as_deref().unwrap_or(&[]) {
                    match label {
                        TokenLabel::Mrw => metaphor += 1,
                        TokenLabel::Literal => literal += 1,
                        TokenLabel::MFlag => other += 1,
                    }
                }
            }
        }
        LabelType::Sentence | LabelType::Span => {
            for inst in instances {
                match inst.sentence_label {
                    Some(SentenceLabel::Metaphor) => metaphor += 1,
                    Some(SentenceLabel::Literal) => literal += 1,
                    Some(SentenceLabel::Other) => other += 1,
                    None => {}
                }
            }
        }
    }
    let total = metaphor + literal + other;
    DatasetStats {
        total,
        metaphor,
        literal,
        other,
        metaphor_pct: if total == 0 {
            0.0
        } else {
            metaphor as f64 / total as f64
        },
    }
}

/// Sentence-level conversion: a sentence is metaphorical iff it contains
/// at least one MRW token. MFlag alone does not trigger the positive
/// label. Errors on instances that are not token-labeled.
pub fn to_sentence_level(
    token_instances: &[GoldInstance],
) -> Result<Vec<GoldInstance>, InstanceError> {
    token_instances
        .iter()
        .map(|inst| {
            let labels = inst
                .token_labels
                .as_ref()
                .ok_or_else(|| inst.err("to_sentence_level requires token labels"))?;
            let label = if labels.iter().any(|&l| l == TokenLabel::Mrw) {
                SentenceLabel::Metaphor
            } else {
                SentenceLabel::Literal
            };
            Ok(GoldInstance {
                source_id: inst.source_id.clone(),
                text: inst.text.clone(),
                register: inst.register.clone(),
                tokens: None,
                token_labels: None,
                sentence_label: Some(label),
                spans: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NTooLarge {
    pub n: usize,
    pub len: usize,
}

impl fmt::Display for NTooLarge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot sample {} items from {}", self.n, self.len)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NTooLarge {}

/// Indices of a deterministic pseudo-random `n`-subset of `0..len`,
/// ascending. Selection is a partial Fisher-Yates shuffle over the
/// SplitMix64 stream of `seed`; the ascending sort makes the output
/// follow corpus order.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>, NTooLarge> {
    if n > len {
        return Err(NTooLarge { n, len });
    }
    let mut pool: Vec<usize> = (0..len).collect();
    let mut rng = SplitMix64::new(seed);
    for i in 0..n {
        let j = i + rng.next_below((len - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut picked = pool[..n].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Deterministic pseudo-random subset of `items`, in corpus order.
pub fn sample<T: Clone>(items: &[T], n: usize, seed: u64) -> Result<Vec<T>, NTooLarge> {
    Ok(sample_indices(items.len(), n, seed)?
        .into_iter()
        .map(|i| items[i].clone())
        .collect())
}
