//! Protocol B: sentence-level identification via conceptual mapping.
//!
//! A sentence is metaphorical iff a complete tenor-vehicle-ground triple
//! can be extracted and validates as coherent. Extraction walks vehicle
//! -> tenor -> ground -> domain labels; an empty vehicle or tenor answer
//! means no mapping exists (literal), while gateway failures propagate
//! so the engine can abstain visibly.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::gateway::{Gateway, GatewayError, LLMRequest, RequestDigest, SchemaViolation};
use crate::protocol::{logged_call, Label, ProtocolConfig, StageFailure};
use crate::protocols::{parse_domain, taxonomy_slot, DomainLabel};
use crate::textprep::{find_char_span_avoiding, CharSpan, Sentence};

/// A tenor-vehicle-ground mapping with domain labels. `coherent` is set
/// by [`validate_triple`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTriple {
    pub tenor: CharSpan,
    pub tenor_text: String,
    pub vehicle: CharSpan,
    pub vehicle_text: String,
    /// Shared property motivating the mapping; empty means implicit
    /// (the triple is incomplete).
    pub ground: String,
    pub tenor_domain: DomainLabel,
    pub vehicle_domain: DomainLabel,
    pub coherent: bool,
}

pub const STEP_VEHICLE: &str = "vehicle-extraction";
pub const STEP_TENOR: &str = "tenor-extraction";
pub const STEP_GROUND: &str = "ground-extraction";
pub const STEP_DOMAINS: &str = "domain-assignment";
pub const STEP_VALIDATE: &str = "triple-validation";

pub fn vehicle_request(
    config: &ProtocolConfig,
    sentence_text: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "vehicle", STEP_VEHICLE)?;
    Ok(LLMRequest::new(id, [("sentence", sentence_text)], id))
}

pub fn tenor_request(
    config: &ProtocolConfig,
    sentence_text: &str,
    vehicle: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "tenor", STEP_TENOR)?;
    Ok(LLMRequest::new(
        id,
        [("sentence", sentence_text), ("vehicle", vehicle)],
        id,
    ))
}

pub fn ground_request(
    config: &ProtocolConfig,
    sentence_text: &str,
    tenor: &str,
    vehicle: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "ground", STEP_GROUND)?;
    Ok(LLMRequest::new(
        id,
        [
            ("sentence", sentence_text),
            ("tenor", tenor),
            ("vehicle", vehicle),
        ],
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
    avoid: &[CharSpan],
    schema_id: &str,
    step: &str,
) -> Result<CharSpan, StageFailure> {
    find_char_span_avoiding(&sentence.text, needle, 0, avoid).ok_or_else(|| {
        StageFailure::new(
            step,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(
                schema_id,
                alloc::format!("extracted expression {needle:?} not locatable in sentence"),
            )),
        )
    })
}

/// Extraction: vehicle, tenor, ground, then domain labels. `Ok(None)`
/// means the model found no vehicle or no tenor (no mapping to
/// validate); `Err` is a gateway failure. The returned triple has
/// `coherent` unset (false) until validated.
pub fn extract_triple(
    config: &ProtocolConfig,
    sentence: &Sentence,
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<Option<ConceptTriple>, StageFailure> {
    let req = vehicle_request(config, &sentence.text)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_VEHICLE, e))?;
    let vehicle_text = resp.field("vehicle").to_string();
    if vehicle_text.is_empty() {
        return Ok(None);
    }
    let vehicle = locate(sentence, &vehicle_text, &[], &req.schema_id, STEP_VEHICLE)?;

    let req = tenor_request(config, &sentence.text, &vehicle_text)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_TENOR, e))?;
    let tenor_text = resp.field("tenor").to_string();
    if tenor_text.is_empty() {
        return Ok(None);
    }
    let tenor = locate(sentence, &tenor_text, &[vehicle], &req.schema_id, STEP_TENOR)?;

    let req = ground_request(config, &sentence.text, &tenor_text, &vehicle_text)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_GROUND, e))?;
    let ground = resp.field("ground").to_string();

    let req = domains_request(config, &tenor_text, &vehicle_text)?;
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

    Ok(Some(ConceptTriple {
        tenor,
        tenor_text,
        vehicle,
        vehicle_text,
        ground,
        tenor_domain,
        vehicle_domain,
        coherent: false,
    }))
}

/// Coherence rule, stated explicitly so it is editable: the ground is
/// nonempty AND the tenor and vehicle domains differ AND their spans do
/// not overlap.
pub fn validate_triple(mut triple: ConceptTriple) -> ConceptTriple {
    triple.coherent = !triple.ground.is_empty()
        && triple.tenor_domain != triple.vehicle_domain
        && !triple.tenor.overlaps(&triple.vehicle);
    triple
}

/// Classification: metaphorical iff a triple is present and coherent.
pub fn classify(triple: Option<&ConceptTriple>) -> Label {
    match triple {
        Some(t) if t.coherent => Label::Metaphorical,
        _ => Label::Literal,
    }
}
