//! Protocol D: simile identification gated on explicit comparison
//! markers.
//!
//! No marker, no analysis: a marker-free sentence is literal without any
//! gateway call, which is what makes this the most constrained protocol.
//! When markers are present the pipeline extracts the tenor and vehicle
//! of the comparison and checks whether they belong to different
//! conceptual domains; same-domain comparisons (she looks like her
//! mother) are literal.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::gateway::{Gateway, GatewayError, LLMRequest, RequestDigest, SchemaViolation};
use crate::protocol::{logged_call, Label, ProtocolConfig, StageFailure};
use crate::protocols::{parse_domain, taxonomy_slot, DomainLabel};
use crate::textprep::{find_char_span_avoiding, CharSpan, Sentence};

/// A detected comparison marker occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerHit {
    pub marker: String,
    pub span: CharSpan,
}

/// An analyzed comparison construction. `cross_domain` stays unset until
/// [`cross_domain`] assigns the domain labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonConstruct {
    pub marker: MarkerHit,
    pub tenor: CharSpan,
    pub tenor_text: String,
    pub vehicle: CharSpan,
    pub vehicle_text: String,
    pub tenor_domain: Option<DomainLabel>,
    pub vehicle_domain: Option<DomainLabel>,
    pub cross_domain: Option<bool>,
}

/// The bundled 15-entry marker lexicon: the seven core simile indicators
/// plus eight documented reconstructions. The set is configuration, not
/// code; edit the config (or marker file) to change it.
pub fn default_markers() -> Vec<String> {
    [
        // Core seven.
        "像", "如", "似", "仿佛", "好像", "犹如", "如同",
        // Documented additions to reach the curated 15.
        "一样", "般", "宛如", "恰似", "好比", "如若", "有如", "胜似",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub const STEP_MARKERS: &str = "marker-detection";
pub const STEP_EXTRACT: &str = "comparison-extraction";
pub const STEP_DOMAINS: &str = "cross-domain-check";

/// Finds all non-overlapping marker occurrences, longest match first at
/// each position (如同 wins over 如), scanning left to right.
pub fn detect_markers(sentence_text: &str, markers: &[String]) -> Vec<MarkerHit> {
    let chars: Vec<char> = sentence_text.chars().collect();
    // Longer markers tried first; ties broken lexicographically so the
    // scan order is total.
    let mut ordered: Vec<&String> = markers.iter().collect();
    ordered.sort_by(|a, b| {
        b.chars()
            .count()
            .cmp(&a.chars().count())
            .then_with(|| a.cmp(b))
    });
    let mut hits = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut advanced = false;
        for marker in &ordered {
            let m: Vec<char> = marker.chars().collect();
            if m.is_empty() || pos + m.len() > chars.len() {
                continue;
            }
            if chars[pos..pos + m.len()] == m[..] {
                hits.push(MarkerHit {
                    marker: (*marker).clone(),
                    span: CharSpan::new(pos, pos + m.len()),
                });
                pos += m.len();
                advanced = true;
                break;
            }
        }
        if !advanced {
            pos += 1;
        }
    }
    hits
}

pub fn extract_request(
    config: &ProtocolConfig,
    sentence_text: &str,
    marker: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "extract", STEP_EXTRACT)?;
    Ok(LLMRequest::new(
        id,
        [("sentence", sentence_text), ("marker", marker)],
        id,
    ))
}

pub fn domains_request(
    config: &ProtocolConfig,
    tenor: &str,
    vehicle: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "domains", STEP_DOMAINS)?;
    Ok(LLMRequest::new(
        id,
        [
            ("tenor", tenor),
            ("vehicle", vehicle),
            ("taxonomy", taxonomy_slot(&config.domains).as_str()),
        ],
        id,
    ))
}

fn template<'c>(
    config: &'c ProtocolConfig,
    key: &str,
    step: &str,
) -> Result<&'c str, StageFailure> {
    config.template_for(key).map_err(|e| {
        StageFailure::new(
            step,
            GatewayError::Render(crate::gateway::RenderError::UnknownTemplate(
                alloc::format!("{e}"),
            )),
        )
    })
}

fn locate(
    sentence: &Sentence,
    needle: &str,
    from: usize,
    avoid: &[CharSpan],
    schema_id: &str,
    what: &str,
) -> Result<CharSpan, StageFailure> {
    find_char_span_avoiding(&sentence.text, needle, from, avoid)
        .or_else(|| find_char_span_avoiding(&sentence.text, needle, 0, avoid))
        .ok_or_else(|| {
            StageFailure::new(
                STEP_EXTRACT,
                GatewayError::SchemaViolation(SchemaViolation::bad_value(
                    schema_id,
                    alloc::format!(
                        "{what} {needle:?} not locatable outside the marker span"
                    ),
                )),
            )
        })
}

/// Extracts the tenor and vehicle around one marker. Spans must not
/// overlap the marker (or each other); a response whose expressions
/// cannot be located that way is a format failure.
pub fn extract_comparison(
    config: &ProtocolConfig,
    sentence: &Sentence,
    marker: &MarkerHit,
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<ComparisonConstruct, StageFailure> {
    let req = extract_request(config, &sentence.text, &marker.marker)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_EXTRACT, e))?;
    let tenor_text = resp.field("tenor").to_string();
    let vehicle_text = resp.field("vehicle").to_string();
    if tenor_text.is_empty() || vehicle_text.is_empty() {
        return Err(StageFailure::new(
            STEP_EXTRACT,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(
                &req.schema_id,
                "tenor and vehicle must be nonempty for a detected marker",
            )),
        ));
    }
    // The tenor normally precedes the marker, the vehicle follows it.
    let tenor = locate(sentence, &tenor_text, 0, &[marker.span], &req.schema_id, "tenor")?;
    let vehicle = locate(
        sentence,
        &vehicle_text,
        marker.span.end,
        &[marker.span, tenor],
        &req.schema_id,
        "vehicle",
    )?;
    Ok(ComparisonConstruct {
        marker: marker.clone(),
        tenor,
        tenor_text,
        vehicle,
        vehicle_text,
        tenor_domain: None,
        vehicle_domain: None,
        cross_domain: None,
    })
}

/// Assigns domain labels to both sides and sets `cross_domain` to
/// whether they differ.
pub fn cross_domain(
    config: &ProtocolConfig,
    mut construct: ComparisonConstruct,
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<ComparisonConstruct, StageFailure> {
    let req = domains_request(config, &construct.tenor_text, &construct.vehicle_text)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_DOMAINS, e))?;
    let tenor_domain = parse_domain(
        resp.field("tenor_domain"),
        &config.domains,
        &req.schema_id,
        "tenor_domain",
        STEP_DOMAINS,
    )?;
    let vehicle_domain = parse_domain(
        resp.field("vehicle_domain"),
        &config.domains,
        &req.schema_id,
        "vehicle_domain",
        STEP_DOMAINS,
    )?;
    construct.tenor_domain = Some(tenor_domain);
    construct.vehicle_domain = Some(vehicle_domain);
    construct.cross_domain = Some(tenor_domain != vehicle_domain);
    Ok(construct)
}

/// Classification: a simile (metaphorical) iff the comparison crosses
/// domains.
pub fn classify(construct: &ComparisonConstruct) -> Label {
    if construct.cross_domain == Some(true) {
        Label::Metaphorical
    } else {
        Label::Literal
    }
}

/// Analyzes the detected markers left to right and returns the first
/// cross-domain construct, or the first analyzed construct when none
/// crosses domains. Any gateway failure aborts the sentence.
pub fn analyze_markers(
    config: &ProtocolConfig,
    sentence: &Sentence,
    markers: &[MarkerHit],
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<ComparisonConstruct, StageFailure> {
    let mut first: Option<ComparisonConstruct> = None;
    for marker in markers {
        let construct = extract_comparison(config, sentence, marker, gateway, log)?;
        let construct = cross_domain(config, construct, gateway, log)?;
        if construct.cross_domain == Some(true) {
            return Ok(construct);
        }
        if first.is_none() {
            first = Some(construct);
        }
    }
    // markers is nonempty by the caller's contract.
    Ok(first.expect("analyze_markers called with no markers"))
}
