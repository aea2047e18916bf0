//! Protocol C: sentence-level identification via emotional incongruity.
//!
//! The pipeline assesses the sentence's dominant valence, looks for a
//! constituent whose literal emotional charge clashes with its charge in
//! context, and asks whether a figurative reading resolves the clash.
//! Metaphorical iff an incongruent constituent exists and the clash is
//! resolvable.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::gateway::{Gateway, GatewayError, LLMRequest, RequestDigest, SchemaViolation};
use crate::protocol::{logged_call, Label, ProtocolConfig, StageFailure};
use crate::protocols::{parse_yes_no, Valence};
use crate::textprep::{find_char_span, CharSpan, Sentence};

/// The incongruent constituent, when one was found. Literal and
/// in-context valences exist exactly when the span does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncongruentSpan {
    pub span: CharSpan,
    pub text: String,
    pub literal: Valence,
    pub figurative: Valence,
}

/// Full assessment record for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValenceAssessment {
    pub sentence_valence: Valence,
    pub incongruent: Option<IncongruentSpan>,
    /// Whether a figurative reading resolves the incongruity; false
    /// whenever no incongruent constituent exists.
    pub resolvable: bool,
}

pub const STEP_OVERALL: &str = "valence-assessment";
pub const STEP_INCONGRUITY: &str = "incongruity-detection";
pub const STEP_RESOLUTION: &str = "figurative-resolution";

pub fn overall_request(
    config: &ProtocolConfig,
    sentence_text: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "overall", STEP_OVERALL)?;
    Ok(LLMRequest::new(id, [("sentence", sentence_text)], id))
}

pub fn incongruity_request(
    config: &ProtocolConfig,
    sentence_text: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "incongruity", STEP_INCONGRUITY)?;
    Ok(LLMRequest::new(id, [("sentence", sentence_text)], id))
}

pub fn resolution_request(
    config: &ProtocolConfig,
    sentence_text: &str,
    expression: &str,
) -> Result<LLMRequest, StageFailure> {
    let id = template(config, "resolution", STEP_RESOLUTION)?;
    Ok(LLMRequest::new(
        id,
        [("sentence", sentence_text), ("expression", expression)],
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

fn parse_valence_field(
    value: &str,
    schema_id: &str,
    field: &str,
    step: &str,
) -> Result<Valence, StageFailure> {
    Valence::parse(value).ok_or_else(|| {
        StageFailure::new(
            step,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(
                schema_id,
                alloc::format!("field {field:?} has invalid valence {value:?}"),
            )),
        )
    })
}

/// Full assessment: overall valence, incongruent constituent, and (when
/// one exists) resolvability under a figurative reading.
pub fn assess(
    config: &ProtocolConfig,
    sentence: &Sentence,
    gateway: &Gateway<'_>,
    log: &mut Vec<RequestDigest>,
) -> Result<ValenceAssessment, StageFailure> {
    let req = overall_request(config, &sentence.text)?;
    let resp = logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_OVERALL, e))?;
    let sentence_valence =
        parse_valence_field(resp.field("valence"), &req.schema_id, "valence", STEP_OVERALL)?;

    let req = incongruity_request(config, &sentence.text)?;
    let resp =
        logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_INCONGRUITY, e))?;
    let expression = resp.field("expression").to_string();
    if expression.is_empty() {
        return Ok(ValenceAssessment {
            sentence_valence,
            incongruent: None,
            resolvable: false,
        });
    }
    let span = find_char_span(&sentence.text, &expression, 0).ok_or_else(|| {
        StageFailure::new(
            STEP_INCONGRUITY,
            GatewayError::SchemaViolation(SchemaViolation::bad_value(
                &req.schema_id,
                alloc::format!("expression {expression:?} not locatable in sentence"),
            )),
        )
    })?;
    let literal = parse_valence_field(
        resp.field("literal"),
        &req.schema_id,
        "literal",
        STEP_INCONGRUITY,
    )?;
    let figurative = parse_valence_field(
        resp.field("figurative"),
        &req.schema_id,
        "figurative",
        STEP_INCONGRUITY,
    )?;

    let req = resolution_request(config, &sentence.text, &expression)?;
    let resp =
        logged_call(gateway, &req, log).map_err(|e| StageFailure::new(STEP_RESOLUTION, e))?;
    let resolvable = parse_yes_no(
        resp.field("resolvable"),
        &req.schema_id,
        "resolvable",
        STEP_RESOLUTION,
    )?;

    Ok(ValenceAssessment {
        sentence_valence,
        incongruent: Some(IncongruentSpan {
            span,
            text: expression,
            literal,
            figurative,
        }),
        resolvable,
    })
}

/// Classification: metaphorical iff an incongruent constituent exists
/// AND the incongruity resolves under a figurative reading.
pub fn classify(assessment: &ValenceAssessment) -> Label {
    if assessment.incongruent.is_some() && assessment.resolvable {
        Label::Metaphorical
    } else {
        Label::Literal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{default_schemas, default_templates, Backend, FixtureTable, MemoryStore};
    use crate::protocol::ProtocolId;

    fn assessment(with_span: bool, resolvable: bool) -> ValenceAssessment {
        ValenceAssessment {
            sentence_valence: Valence::Mixed,
            incongruent: with_span.then(|| IncongruentSpan {
                span: CharSpan::new(0, 2),
                text: "冰冷".into(),
                literal: Valence::Neutral,
                figurative: Valence::Negative,
            }),
            resolvable,
        }
    }

    #[test]
    fn classify_truth_table() {
        // Two-condition rule over (incongruity present, resolvable).
        assert_eq!(classify(&assessment(true, true)), Label::Metaphorical);
        assert_eq!(classify(&assessment(true, false)), Label::Literal);
        assert_eq!(classify(&assessment(false, false)), Label::Literal);
        // resolvable without a span cannot arise from assess(); the rule
        // still answers literal.
        assert_eq!(classify(&assessment(false, true)), Label::Literal);
    }

    fn run_assess(
        table: &FixtureTable,
        text: &str,
    ) -> Result<ValenceAssessment, StageFailure> {
        let templates = default_templates();
        let schemas = default_schemas();
        let store = MemoryStore::new();
        let gw = Gateway::new(&templates, &schemas, &store, Backend::Stub(table));
        let config = ProtocolConfig::default_for(ProtocolId::C);
        let mut log = Vec::new();
        assess(&config, &Sentence::untokenized("c", text), &gw, &mut log)
    }

    #[test]
    fn neutral_sentence_has_no_incongruity() {
        let mut table = FixtureTable::new();
        table.insert_template("valence_overall", "valence: neutral\n");
        table.insert_template("valence_incongruity", "expression:\n");
        let a = run_assess(&table, "他在走路。").unwrap();
        assert_eq!(a.sentence_valence, Valence::Neutral);
        assert!(a.incongruent.is_none());
        assert!(!a.resolvable);
        assert_eq!(classify(&a), Label::Literal);
    }

    #[test]
    fn charged_word_in_neutral_frame_resolves() {
        // Negative-charged word in a neutral literal frame, resolvable
        // through a figurative reading.
        let mut table = FixtureTable::new();
        table.insert_template("valence_overall", "valence: negative\n");
        table.insert_template(
            "valence_incongruity",
            "expression: 刀子\nliteral: neutral\nfigurative: negative\n",
        );
        table.insert_template("valence_resolution", "resolvable: yes\n");
        let a = run_assess(&table, "她的嘴是刀子。").unwrap();
        let inc = a.incongruent.as_ref().unwrap();
        assert_eq!(inc.text, "刀子");
        assert_eq!(inc.span, CharSpan::new(4, 6));
        assert!(a.resolvable);
        assert_eq!(classify(&a), Label::Metaphorical);
    }

    #[test]
    fn mixed_unresolvable_incongruity_is_literal() {
        let mut table = FixtureTable::new();
        table.insert_template("valence_overall", "valence: mixed\n");
        table.insert_template(
            "valence_incongruity",
            "expression: 刀子\nliteral: neutral\nfigurative: negative\n",
        );
        table.insert_template("valence_resolution", "resolvable: no\n");
        let a = run_assess(&table, "她的嘴是刀子。").unwrap();
        assert!(a.incongruent.is_some());
        assert!(!a.resolvable);
        assert_eq!(classify(&a), Label::Literal);
    }

    #[test]
    fn missing_valences_with_expression_is_violation() {
        // literal/figurative must accompany a nonempty expression.
        let mut table = FixtureTable::new();
        table.insert_template("valence_overall", "valence: negative\n");
        table.insert_template("valence_incongruity", "expression: 刀子\n");
        let fail = run_assess(&table, "她的嘴是刀子。").unwrap_err();
        assert_eq!(fail.step, STEP_INCONGRUITY);
        assert_eq!(fail.error.kind(), "schema-violation");
    }

    #[test]
    fn unlocatable_expression_is_violation() {
        let mut table = FixtureTable::new();
        table.insert_template("valence_overall", "valence: negative\n");
        table.insert_template(
            "valence_incongruity",
            "expression: 斧头\nliteral: neutral\nfigurative: negative\n",
        );
        let fail = run_assess(&table, "她的嘴是刀子。").unwrap_err();
        assert_eq!(fail.step, STEP_INCONGRUITY);
    }
}
