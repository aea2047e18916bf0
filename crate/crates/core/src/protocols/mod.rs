//! The four metaphor identification protocols, each decomposed into
//! candidate-selection, semantic-analysis, and classification steps.
//!
//! - [`mip`]: per-token basic-meaning contrast (protocol A)
//! - [`mapping`]: tenor-vehicle-ground conceptual mapping (protocol B)
//! - [`valence`]: emotional incongruity (protocol C)
//! - [`simile`]: marker-gated comparison (protocol D)
//!
//! Classification rules here are pure functions of the analysis records;
//! everything the LLM contributed is visible in those records.

pub mod mapping;
pub mod mip;
pub mod simile;
pub mod valence;

use alloc::string::String;
use core::fmt;

use crate::gateway::{GatewayError, SchemaViolation};
use crate::protocol::StageFailure;

/// Closed conceptual-domain taxonomy for tenor/vehicle assignment.
/// Cross-domain means the two sides land on different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub enum DomainLabel {
    Human,
    Animal,
    Plant,
    Object,
    NaturalPhenomenon,
    Abstract,
    Event,
    Place,
    Body,
    Other,
}

impl DomainLabel {
    pub const ALL: [DomainLabel; 10] = [
        DomainLabel::Human,
        DomainLabel::Animal,
        DomainLabel::Plant,
        DomainLabel::Object,
        DomainLabel::NaturalPhenomenon,
        DomainLabel::Abstract,
        DomainLabel::Event,
        DomainLabel::Place,
        DomainLabel::Body,
        DomainLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainLabel::Human => "HUMAN",
            DomainLabel::Animal => "ANIMAL",
            DomainLabel::Plant => "PLANT",
            DomainLabel::Object => "OBJECT",
            DomainLabel::NaturalPhenomenon => "NATURAL_PHENOMENON",
            DomainLabel::Abstract => "ABSTRACT",
            DomainLabel::Event => "EVENT",
            DomainLabel::Place => "PLACE",
            DomainLabel::Body => "BODY",
            DomainLabel::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<DomainLabel> {
        let upper: String = s.trim().chars().map(|c| c.to_ascii_uppercase()).collect();
        DomainLabel::ALL.iter().copied().find(|d| d.as_str() == upper)
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<DomainLabel> for String {
    fn from(d: DomainLabel) -> String {
        String::from(d.as_str())
    }
}

impl TryFrom<String> for DomainLabel {
    type Error = String;

    fn try_from(s: String) -> Result<DomainLabel, String> {
        DomainLabel::parse(&s).ok_or_else(|| alloc::format!("unknown domain label {s:?}"))
    }
}

/// Emotional valence classes used by protocol C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Valence {
    Positive,
    Negative,
    Neutral,
    Mixed,
}

impl Valence {
    pub fn as_str(self) -> &'static str {
        match self {
            Valence::Positive => "positive",
            Valence::Negative => "negative",
            Valence::Neutral => "neutral",
            Valence::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Valence> {
        match s.trim() {
            "positive" => Some(Valence::Positive),
            "negative" => Some(Valence::Negative),
            "neutral" => Some(Valence::Neutral),
            "mixed" => Some(Valence::Mixed),
            _ => None,
        }
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses a constrained yes/no field value (ASCII case-insensitive);
/// anything else is a format failure of the named schema.
pub(crate) fn parse_yes_no(
    value: &str,
    schema_id: &str,
    field: &str,
    step: &str,
) -> Result<bool, StageFailure> {
    match value.trim().to_ascii_lowercase().as_str() {
        "yes" => Ok(true),
        "no" => Ok(false),
        other => Err(StageFailure::new(
            step,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(
                schema_id,
                alloc::format!("field {field:?} must be yes or no, got {other:?}"),
            )),
        )),
    }
}

/// Parses a domain label constrained to the configured taxonomy.
pub(crate) fn parse_domain(
    value: &str,
    allowed: &[DomainLabel],
    schema_id: &str,
    field: &str,
    step: &str,
) -> Result<DomainLabel, StageFailure> {
    let bad = |detail: String| {
        StageFailure::new(
            step,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(schema_id, detail)),
        )
    };
    let label = DomainLabel::parse(value)
        .ok_or_else(|| bad(alloc::format!("field {field:?}: unknown domain {value:?}")))?;
    if !allowed.contains(&label) {
        return Err(bad(alloc::format!(
            "field {field:?}: domain {label} is outside the configured taxonomy"
        )));
    }
    Ok(label)
}

/// Joined taxonomy text for prompt slots, in configuration order.
pub(crate) fn taxonomy_slot(allowed: &[DomainLabel]) -> String {
    let mut out = String::new();
    for (i, d) in allowed.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(d.as_str());
    }
    out
}
