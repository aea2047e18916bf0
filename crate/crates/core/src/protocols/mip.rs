//! Protocol A: per-token identification by basic-meaning contrast.
//!
//! For each content word the pipeline establishes the contextual
//! meaning, retrieves the most basic concrete meaning (dictionary first,
//! LLM sense enumeration as fallback), and asks whether the two contrast
//! yet the contextual one is understood by comparison with the basic
//! one. Both flags true means the token is metaphorical.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::gateway::{Gateway, GatewayError, LLMRequest, RequestDigest, SchemaViolation};
use crate::protocol::{logged_call, Label, ProtocolConfig, StageFailure};
use crate::protocols::parse_yes_no;
use crate::textprep::{Pos, Sentence};

/// Where the basic meaning came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicSource {
    Dictionary,
    LlmEnumerated,
}

impl BasicSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BasicSource::Dictionary => "dictionary",
            BasicSource::LlmEnumerated => "llm_enumerated",
        }
    }
}

/// Analysis record for one candidate token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningPair {
    pub token_index: usize,
    pub word: String,
    /// Meaning in this sentence.
    pub contextual: String,
    /// Most basic, concrete meaning.
    pub basic: String,
    pub basic_source: BasicSource,
    /// Contextual meaning contrasts with the basic meaning.
    pub contrasts: bool,
    /// Contextual meaning can be understood by comparison with the
    /// basic meaning.
    pub comprehensible: bool,
    /// Implicit-metaphor annotation (ellipsis/substitution) when the
    /// contrast call reports one. Recorded for auditing; never changes
    /// the binary label.
    pub implicit: Option<String>,
}

/// Word -> basic sense gloss. Stands in for a full reference dictionary;
/// anything missing here falls back to LLM sense enumeration.
#[derive(Debug, Clone, Default)]
pub struct BasicDictionary {
    entries: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryParseError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for DictionaryParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dictionary line {}: {}", self.line, self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DictionaryParseError {}

impl BasicDictionary {
    pub fn new() -> BasicDictionary {
        BasicDictionary::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, gloss: impl Into<String>) {
        self.entries.insert(word.into(), gloss.into());
    }

    /// Parses `word<TAB>basic_gloss` lines; `#` comments and blanks
    /// skipped.
    pub fn parse(text: &str) -> Result<BasicDictionary, DictionaryParseError> {
        let mut dict = BasicDictionary::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((word, gloss)) if !word.is_empty() && !gloss.is_empty() => {
                    dict.insert(word, gloss);
                }
                _ => {
                    return Err(DictionaryParseError {
                        line: i + 1,
                        reason: "expected word<TAB>gloss".to_string(),
                    })
                }
            }
        }
        Ok(dict)
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.entries.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Candidate selection: indices of tokens whose POS is in the configured
/// content-word set, in sentence order.
pub fn select_candidates(sentence: &Sentence, candidate_pos: &[Pos]) -> Vec<usize> {
    sentence
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| candidate_pos.contains(&t.pos))
        .map(|(i, _)| i)
        .collect()
}

/// Request for the contextual meaning alone (used when the dictionary
/// already supplied the basic meaning).
pub fn contextual_request(
    config: &ProtocolConfig,
    word: &str,
    sentence_text: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template_id(config, "contextual", STEP_CONTEXTUAL)?;
    Ok(LLMRequest::new(
        id,
        [("word", word), ("sentence", sentence_text)],
        id,
    ))
}

/// Request for contextual + basic meaning in one two-field call (LLM
/// sense enumeration fallback).
pub fn meanings_request(
    config: &ProtocolConfig,
    word: &str,
    sentence_text: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template_id(config, "meanings", STEP_BASIC)?;
    Ok(LLMRequest::new(
        id,
        [("word", word), ("sentence", sentence_text)],
        id,
    ))
}

/// Request for the contrast / comprehension-by-comparison flags.
pub fn contrast_request(
    config: &ProtocolConfig,
    word: &str,
    sentence_text: &str,
    contextual: &str,
    basic: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template_id(config, "contrast", STEP_CONTRAST)?;
    Ok(LLMRequest::new(
        id,
        [
            ("word", word),
            ("sentence", sentence_text),
            ("contextual", contextual),
            ("basic", basic),
        ],
        id,
    ))
}

pub const STEP_CONTEXTUAL: &str = "contextual-meaning";
pub const STEP_BASIC: &str = "basic-meaning";
pub const STEP_CONTRAST: &str = "contrast-assessment";

fn template_id<'c>(
    config: &'c ProtocolConfig,
    step_key: &str,
    step: &str,
) -> Result<&'c str, StageFailure> {
    config.template_for(step_key).map_err(|e| {
        StageFailure::new(
            step,
            GatewayError::Render(crate::gateway::RenderError::UnknownTemplate(
                alloc::format!("{e}"),
            )),
        )
    })
}

/// Semantic analysis for one candidate token: contextual meaning, basic
/// meaning (dictionary first, LLM enumeration fallback), then the
/// contrast flags. All calls go through the gateway and are logged.
pub fn analyze_word(
    config: &ProtocolConfig,
    dictionary: &BasicDictionary,
    sentence: &Sentence,
    token_index: usize,
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<MeaningPair, StageFailure> {
    let word = sentence.tokens[token_index].surface.clone();

    let (contextual, basic, basic_source) = match dictionary.get(&word) {
        Some(gloss) => {
            let req = contextual_request(config, &word, &sentence.text)?;
            let resp = logged_call(gateway, &req, log)
                .map_err(|e| StageFailure::new(STEP_CONTEXTUAL, e))?;
            (
                resp.field("contextual").to_string(),
                gloss.to_string(),
                BasicSource::Dictionary,
            )
        }
        None => {
            let req = meanings_request(config, &word, &sentence.text)?;
            let resp =
                logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_BASIC, e))?;
            (
                resp.field("contextual").to_string(),
                resp.field("basic").to_string(),
                BasicSource::LlmEnumerated,
            )
        }
    };

    let req = contrast_request(config, &word, &sentence.text, &contextual, &basic)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_CONTRAST, e))?;
    let contrasts = parse_yes_no(resp.field("contrasts"), &req.schema_id, "contrasts", STEP_CONTRAST)?;
    let comprehensible = parse_yes_no(
        resp.field("comprehensible"),
        &req.schema_id,
        "comprehensible",
        STEP_CONTRAST,
    )?;
    let implicit = match resp.field_opt("implicit").map(str::trim) {
        None | Some("") | Some("none") => None,
        Some(v @ ("ellipsis" | "substitution")) => Some(v.to_string()),
        Some(other) => {
            return Err(StageFailure::new(
                STEP_CONTRAST,
                GatewayError::SchemaViolation(SchemaViolation::bad_value(
                    &req.schema_id,
                    alloc::format!("field \"implicit\" has unknown value {other:?}"),
                )),
            ))
        }
    };

    Ok(MeaningPair {
        token_index,
        word,
        contextual,
        basic,
        basic_source,
        contrasts,
        comprehensible,
        implicit,
    })
}

/// Classification: metaphorical iff the contextual meaning contrasts
/// with the basic meaning AND is comprehensible via comparison with it.
pub fn classify(pair: &MeaningPair) -> Label {
    if pair.contrasts && pair.comprehensible {
        Label::Metaphorical
    } else {
        Label::Literal
    }
}
