//! Protocol engine: configuration, decisions, rationales, traces, and
//! the five-stage pipeline executor.
//!
//! The protocol logic lives in [`crate::protocols`]; this module owns the
//! generic machinery: one [`Decision`] plus one [`Rationale`] per
//! analysis target, a [`TraceRecord`] naming every stage and LLM
//! exchange, and canonical serialization so byte equality is a valid
//! determinism test. Gateway failures never disappear: they become
//! ABSTAIN decisions with the error as evidence.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest as _, Sha256};

use crate::canon::Value;
use crate::gateway::{Gateway, GatewayError, LLMRequest, LLMResponse, RequestDigest};
use crate::protocols::mapping::ConceptTriple;
use crate::protocols::mip::{BasicDictionary, MeaningPair};
use crate::protocols::simile::{ComparisonConstruct, MarkerHit};
use crate::protocols::valence::ValenceAssessment;
use crate::protocols::{self, DomainLabel};
use crate::textprep::{Pos, Sentence};

/// The four identification protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProtocolId {
    A,
    B,
    C,
    D,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 4] = [ProtocolId::A, ProtocolId::B, ProtocolId::C, ProtocolId::D];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::A => "A",
            ProtocolId::B => "B",
            ProtocolId::C => "C",
            ProtocolId::D => "D",
        }
    }

    /// What the protocol tests for, for reports.
    pub fn description(self) -> &'static str {
        match self {
            ProtocolId::A => "lexical basic-meaning contrast",
            ProtocolId::B => "tenor-vehicle-ground conceptual mapping",
            ProtocolId::C => "emotional incongruity",
            ProtocolId::D => "marker-gated simile comparison",
        }
    }

    pub fn parse(s: &str) -> Option<ProtocolId> {
        match s {
            "A" | "a" => Some(ProtocolId::A),
            "B" | "b" => Some(ProtocolId::B),
            "C" | "c" => Some(ProtocolId::C),
            "D" | "d" => Some(ProtocolId::D),
            _ => None,
        }
    }

    /// Protocol A decides per token; the rest decide per sentence.
    pub fn granularity(self) -> Granularity {
        match self {
            ProtocolId::A => Granularity::Token,
            _ => Granularity::Sentence,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Metaphorical,
    Literal,
    /// A gateway failure prevented a decision; always carries error
    /// evidence, never silently coerced to LITERAL.
    Abstain,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Metaphorical => "METAPHORICAL",
            Label::Literal => "LITERAL",
            Label::Abstain => "ABSTAIN",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "METAPHORICAL" => Some(Label::Metaphorical),
            "LITERAL" => Some(Label::Literal),
            "ABSTAIN" => Some(Label::Abstain),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Token,
    Sentence,
}

/// What a decision is about: a token index within the sentence, or the
/// sentence as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Token(usize),
    Sentence,
}

impl Target {
    pub fn granularity(self) -> Granularity {
        match self {
            Target::Token(_) => Granularity::Token,
            Target::Sentence => Granularity::Sentence,
        }
    }

    pub fn token_index(self) -> Option<usize> {
        match self {
            Target::Token(i) => Some(i),
            Target::Sentence => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub label: Label,
    pub granularity: Granularity,
    pub target: Target,
}

impl Decision {
    pub fn new(label: Label, target: Target) -> Decision {
        Decision {
            label,
            granularity: target.granularity(),
            target,
        }
    }
}

/// Three-level ordinal confidence derived from rule strength, not a
/// probability. High: the decision rests on deterministic structure or
/// dictionary-backed evidence. Medium: the critical judgment came from
/// LLM output. Low: a degraded path (always the case for ABSTAIN).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::High => "high",
            Confidence::Medium => "medium",
            Confidence::Low => "low",
        }
    }

    pub fn parse(s: &str) -> Option<Confidence> {
        match s {
            "high" => Some(Confidence::High),
            "medium" => Some(Confidence::Medium),
            "low" => Some(Confidence::Low),
            _ => None,
        }
    }
}

/// Protocol-specific evidence backing a decision. Every METAPHORICAL
/// decision carries its protocol's defining record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// Protocol A: the contextual/basic meaning pair and its flags.
    MeaningContrast(MeaningPair),
    /// Protocol B: the extracted triple, or a note on why none exists.
    ConceptMapping {
        triple: Option<ConceptTriple>,
        note: String,
    },
    /// Protocol C: the valence assessment.
    ValenceIncongruity(ValenceAssessment),
    /// Protocol D: detected markers and the analyzed construct, if any.
    Comparison {
        markers: Vec<MarkerHit>,
        construct: Option<ComparisonConstruct>,
    },
    /// A gateway failure; the decision is ABSTAIN.
    EngineError {
        stage: String,
        kind: String,
        detail: String,
        digest: Option<RequestDigest>,
    },
}

impl Evidence {
    pub fn engine_error(stage: &str, error: &GatewayError) -> Evidence {
        Evidence::EngineError {
            stage: stage.to_string(),
            kind: error.kind().to_string(),
            detail: alloc::format!("{error}"),
            digest: error.digest(),
        }
    }

    fn type_tag(&self) -> &'static str {
        match self {
            Evidence::MeaningContrast(_) => "meaning-contrast",
            Evidence::ConceptMapping { .. } => "concept-mapping",
            Evidence::ValenceIncongruity(_) => "valence-incongruity",
            Evidence::Comparison { .. } => "comparison",
            Evidence::EngineError { .. } => "engine-error",
        }
    }
}

/// Structured explanation attached to every decision, ABSTAIN included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rationale {
    /// The specific protocol step that fixed the outcome, e.g.
    /// "marker-detection" or "contrast-assessment".
    pub triggering_step: String,
    pub evidence: Evidence,
    pub confidence: Confidence,
    /// Digests of the LLM exchanges this decision consumed.
    pub llm_digests: Vec<RequestDigest>,
}

/// One pipeline stage in the execution trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTrace {
    pub stage: String,
    /// SHA-256 (hex) of the canonical stage input summary.
    pub input_digest: String,
    /// SHA-256 (hex) of the canonical stage output summary.
    pub output_digest: String,
    pub llm_digests: Vec<RequestDigest>,
}

/// Ordered record of the stages a run executed; every LLM exchange a run
/// consumed appears here, and every digest resolves in the cache.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceRecord {
    pub stages: Vec<StageTrace>,
}

impl TraceRecord {
    pub fn all_llm_digests(&self) -> Vec<RequestDigest> {
        self.stages
            .iter()
            .flat_map(|s| s.llm_digests.iter().copied())
            .collect()
    }
}

/// Output of running one protocol over one sentence. Decisions and
/// rationales are index-paired and always equal in number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRun {
    pub decisions: Vec<Decision>,
    pub rationales: Vec<Rationale>,
    pub trace: TraceRecord,
}

/// Declarative protocol configuration: which templates each analytical
/// step calls, plus the protocol's lexical parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolConfig {
    pub protocol: ProtocolId,
    pub version: String,
    /// Candidate POS set (protocol A).
    #[cfg_attr(feature = "serde", serde(default))]
    pub candidate_pos: Vec<Pos>,
    /// Comparison marker lexicon (protocol D).
    #[cfg_attr(feature = "serde", serde(default))]
    pub markers: Vec<String>,
    /// Active domain taxonomy (protocols B and D).
    #[cfg_attr(feature = "serde", serde(default))]
    pub domains: Vec<DomainLabel>,
    /// Step key -> template id. The same id must name a registered
    /// schema.
    #[cfg_attr(feature = "serde", serde(default))]
    pub templates: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    MissingTemplate { step: String },
    UnknownTemplate { step: String, id: String },
    UnknownSchema { id: String },
    EmptyCandidatePos,
    EmptyDomains,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::MissingTemplate { step } => {
                write!(f, "no template configured for step {step:?}")
            }
            ConfigError::UnknownTemplate { step, id } => {
                write!(f, "step {step:?} references unregistered template {id:?}")
            }
            ConfigError::UnknownSchema { id } => {
                write!(f, "no schema registered under id {id:?}")
            }
            ConfigError::EmptyCandidatePos => write!(f, "candidate POS set is empty"),
            ConfigError::EmptyDomains => write!(f, "domain taxonomy is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

impl ProtocolConfig {
    /// Step keys each protocol requires in `templates`.
    pub fn required_steps(protocol: ProtocolId) -> &'static [&'static str] {
        match protocol {
            ProtocolId::A => &["contextual", "meanings", "contrast"],
            ProtocolId::B => &["vehicle", "tenor", "ground", "domains"],
            ProtocolId::C => &["overall", "incongruity", "resolution"],
            ProtocolId::D => &["extract", "domains"],
        }
    }

    pub fn default_for(protocol: ProtocolId) -> ProtocolConfig {
        let mut templates = BTreeMap::new();
        let (version, pairs): (&str, &[(&str, &str)]) = match protocol {
            ProtocolId::A => (
                "a-1.0.0",
                &[
                    ("contextual", "mip_contextual"),
                    ("meanings", "mip_meanings"),
                    ("contrast", "mip_contrast"),
                ],
            ),
            ProtocolId::B => (
                "b-1.0.0",
                &[
                    ("vehicle", "mapping_vehicle"),
                    ("tenor", "mapping_tenor"),
                    ("ground", "mapping_ground"),
                    ("domains", "mapping_domains"),
                ],
            ),
            ProtocolId::C => (
                "c-1.0.0",
                &[
                    ("overall", "valence_overall"),
                    ("incongruity", "valence_incongruity"),
                    ("resolution", "valence_resolution"),
                ],
            ),
            ProtocolId::D => (
                "d-1.0.0",
                &[("extract", "simile_extract"), ("domains", "simile_domains")],
            ),
        };
        for (k, v) in pairs {
            templates.insert(k.to_string(), v.to_string());
        }
        ProtocolConfig {
            protocol,
            version: version.to_string(),
            candidate_pos: match protocol {
                ProtocolId::A => alloc::vec![Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv],
                _ => Vec::new(),
            },
            markers: match protocol {
                ProtocolId::D => protocols::simile::default_markers(),
                _ => Vec::new(),
            },
            domains: DomainLabel::ALL.to_vec(),
            templates,
        }
    }

    pub fn template_for(&self, step: &str) -> Result<&str, ConfigError> {
        self.templates
            .get(step)
            .map(String::as_str)
            .ok_or_else(|| ConfigError::MissingTemplate {
                step: step.to_string(),
            })
    }

    /// Checks that every referenced template and schema resolves and the
    /// protocol's lexical parameters are usable.
    pub fn validate(
        &self,
        templates: &crate::gateway::TemplateRegistry,
        schemas: &crate::gateway::SchemaRegistry,
    ) -> Result<(), ConfigError> {
        for step in Self::required_steps(self.protocol) {
            let id = self.template_for(step)?;
            if !templates.contains(id) {
                return Err(ConfigError::UnknownTemplate {
                    step: step.to_string(),
                    id: id.to_string(),
                });
            }
            if !schemas.contains(id) {
                return Err(ConfigError::UnknownSchema { id: id.to_string() });
            }
        }
        if self.protocol == ProtocolId::A && self.candidate_pos.is_empty() {
            return Err(ConfigError::EmptyCandidatePos);
        }
        if matches!(self.protocol, ProtocolId::B | ProtocolId::D) && self.domains.is_empty() {
            return Err(ConfigError::EmptyDomains);
        }
        Ok(())
    }
}

/// Run-time resources that are data, not configuration: the basic-sense
/// dictionary protocol A consults before falling back to LLM
/// enumeration.
#[derive(Debug, Clone, Default)]
pub struct ProtocolResources {
    pub dictionary: BasicDictionary,
}

/// A gateway failure inside a particular protocol step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageFailure {
    pub step: String,
    pub error: GatewayError,
}

impl StageFailure {
    pub fn new(step: &str, error: GatewayError) -> StageFailure {
        StageFailure {
            step: step.to_string(),
            error,
        }
    }
}

/// Issues a gateway call and logs its digest when (and only when) the
/// exchange is resolvable in the cache afterwards: successful calls
/// always, schema violations too (the raw exchange was recorded before
/// parsing), but not cache misses or transport failures.
pub fn logged_call(
    gateway: &Gateway<'_>,
    request: &LLMRequest,
    log: &mut Vec<RequestDigest>,
) -> Result<LLMResponse, GatewayError> {
    let digest = crate::gateway::cache_key(request);
    match gateway.call(request) {
        Ok(resp) => {
            log.push(digest);
            Ok(resp)
        }
        Err(e @ GatewayError::SchemaViolation(_)) => {
            log.push(digest);
            Err(e)
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------
// Pipeline executor
// ---------------------------------------------------------------------

/// Stage names as they appear in traces, in pipeline order.
pub const STAGE_CANDIDATES: &str = "candidate-selection";
pub const STAGE_ANALYSIS: &str = "semantic-analysis";
pub const STAGE_CLASSIFY: &str = "classification";
pub const STAGE_RATIONALE: &str = "rationale-generation";

struct TraceBuilder {
    stages: Vec<StageTrace>,
}

impl TraceBuilder {
    fn new() -> TraceBuilder {
        TraceBuilder { stages: Vec::new() }
    }

    fn record(&mut self, stage: &str, input: &Value, output: &Value, llm: Vec<RequestDigest>) {
        self.stages.push(StageTrace {
            stage: stage.to_string(),
            input_digest: digest_of(input),
            output_digest: digest_of(output),
            llm_digests: llm,
        });
    }
}

fn digest_of(value: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(value.to_canonical_string().as_bytes());
    let bytes: [u8; 32] = hasher.finalize().into();
    RequestDigest(bytes).to_hex()
}

fn sentence_summary(sentence: &Sentence) -> Value {
    Value::object([
        ("source_id", Value::string(sentence.source_id.clone())),
        ("text", Value::string(sentence.text.clone())),
        (
            "tokens",
            Value::Array(
                sentence
                    .tokens
                    .iter()
                    .map(|t| {
                        Value::object([
                            ("surface", Value::string(t.surface.clone())),
                            ("pos", Value::string(t.pos.as_str())),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
}

fn labels_summary(decisions: &[Decision]) -> Value {
    Value::Array(
        decisions
            .iter()
            .map(|d| Value::string(d.label.as_str()))
            .collect(),
    )
}

fn rationales_summary(rationales: &[Rationale]) -> Value {
    Value::Array(rationales.iter().map(rationale_to_value).collect())
}

/// Executes the named protocol's pipeline over one preprocessed
/// sentence. Total: gateway failures surface as ABSTAIN decisions, and
/// the trace always records all four engine stages.
pub fn run_protocol(
    config: &ProtocolConfig,
    resources: &ProtocolResources,
    sentence: &Sentence,
    gateway: &Gateway<'_>,
) -> SentenceRun {
    match config.protocol {
        ProtocolId::A => run_a(config, resources, sentence, gateway),
        ProtocolId::B => run_b(config, sentence, gateway),
        ProtocolId::C => run_c(config, sentence, gateway),
        ProtocolId::D => run_d(config, sentence, gateway),
    }
}

fn run_a(
    config: &ProtocolConfig,
    resources: &ProtocolResources,
    sentence: &Sentence,
    gateway: &Gateway<'_>,
) -> SentenceRun {
    use protocols::mip;

    let mut trace = TraceBuilder::new();
    let input = sentence_summary(sentence);

    let candidates = mip::select_candidates(sentence, &config.candidate_pos);
    let cand_out = Value::Array(candidates.iter().map(|&i| Value::Int(i as i64)).collect());
    trace.record(STAGE_CANDIDATES, &input, &cand_out, Vec::new());

    let mut analyses: Vec<(usize, Result<MeaningPair, StageFailure>, Vec<RequestDigest>)> =
        Vec::new();
    let mut stage_digests = Vec::new();
    for &idx in &candidates {
        let mut call_log = Vec::new();
        let outcome = mip::analyze_word(
            config,
            &resources.dictionary,
            sentence,
            idx,
            gateway,
            &mut call_log,
        );
        stage_digests.extend(call_log.iter().copied());
        analyses.push((idx, outcome, call_log));
    }
    let analysis_out = Value::Array(
        analyses
            .iter()
            .map(|(idx, outcome, _)| match outcome {
                Ok(pair) => Value::object([
                    ("token_index", Value::Int(*idx as i64)),
                    ("contextual", Value::string(pair.contextual.clone())),
                    ("basic", Value::string(pair.basic.clone())),
                    ("contrasts", Value::Bool(pair.contrasts)),
                    ("comprehensible", Value::Bool(pair.comprehensible)),
                ]),
                Err(fail) => Value::object([
                    ("token_index", Value::Int(*idx as i64)),
                    ("error", Value::string(fail.error.kind())),
                ]),
            })
            .collect(),
    );
    trace.record(STAGE_ANALYSIS, &cand_out, &analysis_out, stage_digests);

    let mut decisions = Vec::new();
    let mut rationales = Vec::new();
    for (idx, outcome, call_log) in analyses {
        match outcome {
            Ok(pair) => {
                let label = mip::classify(&pair);
                let confidence = match pair.basic_source {
                    mip::BasicSource::Dictionary => Confidence::High,
                    mip::BasicSource::LlmEnumerated => Confidence::Medium,
                };
                decisions.push(Decision::new(label, Target::Token(idx)));
                rationales.push(Rationale {
                    triggering_step: "contrast-assessment".to_string(),
                    evidence: Evidence::MeaningContrast(pair),
                    confidence,
                    llm_digests: call_log,
                });
            }
            Err(fail) => {
                decisions.push(Decision::new(Label::Abstain, Target::Token(idx)));
                rationales.push(Rationale {
                    triggering_step: fail.step.clone(),
                    evidence: Evidence::engine_error(&fail.step, &fail.error),
                    confidence: Confidence::Low,
                    llm_digests: call_log,
                });
            }
        }
    }
    let labels_out = labels_summary(&decisions);
    trace.record(STAGE_CLASSIFY, &analysis_out, &labels_out, Vec::new());
    let rat_out = rationales_summary(&rationales);
    trace.record(STAGE_RATIONALE, &labels_out, &rat_out, Vec::new());

    SentenceRun {
        decisions,
        rationales,
        trace: TraceRecord {
            stages: trace.stages,
        },
    }
}

fn run_b(config: &ProtocolConfig, sentence: &Sentence, gateway: &Gateway<'_>) -> SentenceRun {
    use protocols::mapping;

    let mut trace = TraceBuilder::new();
    let input = sentence_summary(sentence);
    // Every sentence is a candidate for conceptual mapping analysis.
    let cand_out = Value::object([("candidate", Value::string("sentence"))]);
    trace.record(STAGE_CANDIDATES, &input, &cand_out, Vec::new());

    let mut call_log = Vec::new();
    let outcome = mapping::extract_triple(config, sentence, gateway, &mut call_log)
        .map(|maybe| maybe.map(mapping::validate_triple));

    let (decision, rationale, analysis_out) = match outcome {
        Ok(triple) => {
            let label = mapping::classify(triple.as_ref());
            let (confidence, note) = match &triple {
                Some(t) if !t.ground.is_empty() => (Confidence::High, String::new()),
                Some(_) => (Confidence::Medium, "ground is implicit".to_string()),
                None => (
                    Confidence::Medium,
                    "no tenor-vehicle pair found".to_string(),
                ),
            };
            let analysis_out = match &triple {
                Some(t) => Value::object([
                    ("tenor", Value::string(t.tenor_text.clone())),
                    ("vehicle", Value::string(t.vehicle_text.clone())),
                    ("ground", Value::string(t.ground.clone())),
                    ("coherent", Value::Bool(t.coherent)),
                ]),
                None => Value::object([("triple", Value::Null)]),
            };
            let rationale = Rationale {
                triggering_step: if triple.is_some() {
                    "triple-validation".to_string()
                } else {
                    "vehicle-extraction".to_string()
                },
                evidence: Evidence::ConceptMapping { triple, note },
                confidence,
                llm_digests: call_log,
            };
            (
                Decision::new(label, Target::Sentence),
                rationale,
                analysis_out,
            )
        }
        Err(fail) => abstain_outcome(fail, call_log),
    };

    finish_sentence_run(trace, cand_out, analysis_out, decision, rationale)
}

fn run_c(config: &ProtocolConfig, sentence: &Sentence, gateway: &Gateway<'_>) -> SentenceRun {
    use protocols::valence;

    let mut trace = TraceBuilder::new();
    let input = sentence_summary(sentence);
    let cand_out = Value::object([("candidate", Value::string("sentence"))]);
    trace.record(STAGE_CANDIDATES, &input, &cand_out, Vec::new());

    let mut call_log = Vec::new();
    let outcome = valence::assess(config, sentence, gateway, &mut call_log);

    let (decision, rationale, analysis_out) = match outcome {
        Ok(assessment) => {
            let label = valence::classify(&assessment);
            let (step, confidence) = match &assessment.incongruent {
                None => ("incongruity-detection", Confidence::High),
                Some(_) => ("figurative-resolution", Confidence::Medium),
            };
            let analysis_out = Value::object([
                (
                    "sentence_valence",
                    Value::string(assessment.sentence_valence.as_str()),
                ),
                (
                    "incongruent",
                    match &assessment.incongruent {
                        Some(inc) => Value::string(inc.text.clone()),
                        None => Value::Null,
                    },
                ),
                ("resolvable", Value::Bool(assessment.resolvable)),
            ]);
            let rationale = Rationale {
                triggering_step: step.to_string(),
                evidence: Evidence::ValenceIncongruity(assessment),
                confidence,
                llm_digests: call_log,
            };
            (
                Decision::new(label, Target::Sentence),
                rationale,
                analysis_out,
            )
        }
        Err(fail) => abstain_outcome(fail, call_log),
    };

    finish_sentence_run(trace, cand_out, analysis_out, decision, rationale)
}

fn run_d(config: &ProtocolConfig, sentence: &Sentence, gateway: &Gateway<'_>) -> SentenceRun {
    use protocols::simile;

    let mut trace = TraceBuilder::new();
    let input = sentence_summary(sentence);

    let markers = simile::detect_markers(&sentence.text, &config.markers);
    let cand_out = Value::Array(
        markers
            .iter()
            .map(|m| {
                Value::object([
                    ("marker", Value::string(m.marker.clone())),
                    ("start", Value::Int(m.span.start as i64)),
                ])
            })
            .collect(),
    );
    trace.record(STAGE_CANDIDATES, &input, &cand_out, Vec::new());

    let mut call_log = Vec::new();
    let outcome = if markers.is_empty() {
        // No comparison construction: literal without any gateway call.
        Ok(None)
    } else {
        simile::analyze_markers(config, sentence, &markers, gateway, &mut call_log).map(Some)
    };

    let (decision, rationale, analysis_out) = match outcome {
        Ok(None) => {
            let rationale = Rationale {
                triggering_step: "marker-detection".to_string(),
                evidence: Evidence::Comparison {
                    markers: Vec::new(),
                    construct: None,
                },
                confidence: Confidence::High,
                llm_digests: call_log,
            };
            (
                Decision::new(Label::Literal, Target::Sentence),
                rationale,
                Value::object([("construct", Value::Null)]),
            )
        }
        Ok(Some(construct)) => {
            let label = simile::classify(&construct);
            let analysis_out = Value::object([
                ("tenor", Value::string(construct.tenor_text.clone())),
                ("vehicle", Value::string(construct.vehicle_text.clone())),
                (
                    "cross_domain",
                    match construct.cross_domain {
                        Some(b) => Value::Bool(b),
                        None => Value::Null,
                    },
                ),
            ]);
            let rationale = Rationale {
                triggering_step: "cross-domain-check".to_string(),
                evidence: Evidence::Comparison {
                    markers,
                    construct: Some(construct),
                },
                confidence: Confidence::Medium,
                llm_digests: call_log,
            };
            (
                Decision::new(label, Target::Sentence),
                rationale,
                analysis_out,
            )
        }
        Err(fail) => abstain_outcome(fail, call_log),
    };

    finish_sentence_run(trace, cand_out, analysis_out, decision, rationale)
}

fn abstain_outcome(
    fail: StageFailure,
    call_log: Vec<RequestDigest>,
) -> (Decision, Rationale, Value) {
    let analysis_out = Value::object([("error", Value::string(fail.error.kind()))]);
    let rationale = Rationale {
        triggering_step: fail.step.clone(),
        evidence: Evidence::engine_error(&fail.step, &fail.error),
        confidence: Confidence::Low,
        llm_digests: call_log,
    };
    (
        Decision::new(Label::Abstain, Target::Sentence),
        rationale,
        analysis_out,
    )
}

fn finish_sentence_run(
    mut trace: TraceBuilder,
    cand_out: Value,
    analysis_out: Value,
    decision: Decision,
    rationale: Rationale,
) -> SentenceRun {
    let llm = rationale.llm_digests.clone();
    trace.record(STAGE_ANALYSIS, &cand_out, &analysis_out, llm);
    let decisions = alloc::vec![decision];
    let rationales = alloc::vec![rationale];
    let labels_out = labels_summary(&decisions);
    trace.record(STAGE_CLASSIFY, &analysis_out, &labels_out, Vec::new());
    let rat_out = rationales_summary(&rationales);
    trace.record(STAGE_RATIONALE, &labels_out, &rat_out, Vec::new());
    SentenceRun {
        decisions,
        rationales,
        trace: TraceRecord {
            stages: trace.stages,
        },
    }
}

// ---------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------

/// One serialized decision: the sentence it came from, the config that
/// produced it, and the paired decision + rationale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub source_id: String,
    pub protocol_id: ProtocolId,
    pub config_version: String,
    pub decision: Decision,
    pub rationale: Rationale,
}

impl RunRecord {
    /// Sort key fixing output order regardless of scheduling:
    /// (source_id, target index), sentence targets last.
    pub fn sort_key(&self) -> (String, usize) {
        (
            self.source_id.clone(),
            match self.decision.target {
                Target::Token(i) => i,
                Target::Sentence => usize::MAX,
            },
        )
    }
}

fn span_value(span: &crate::textprep::CharSpan) -> Value {
    Value::Array(alloc::vec![
        Value::Int(span.start as i64),
        Value::Int(span.end as i64)
    ])
}

fn domain_value(d: &DomainLabel) -> Value {
    Value::string(d.as_str())
}

fn evidence_to_value(evidence: &Evidence) -> Value {
    let mut v = match evidence {
        Evidence::MeaningContrast(pair) => Value::object([
            ("token_index", Value::Int(pair.token_index as i64)),
            ("word", Value::string(pair.word.clone())),
            ("contextual", Value::string(pair.contextual.clone())),
            ("basic", Value::string(pair.basic.clone())),
            ("basic_source", Value::string(pair.basic_source.as_str())),
            ("contrasts", Value::Bool(pair.contrasts)),
            ("comprehensible", Value::Bool(pair.comprehensible)),
            (
                "implicit",
                match &pair.implicit {
                    Some(s) => Value::string(s.clone()),
                    None => Value::Null,
                },
            ),
        ]),
        Evidence::ConceptMapping { triple, note } => Value::object([
            (
                "triple",
                match triple {
                    Some(t) => Value::object([
                        ("tenor", span_value(&t.tenor)),
                        ("tenor_text", Value::string(t.tenor_text.clone())),
                        ("vehicle", span_value(&t.vehicle)),
                        ("vehicle_text", Value::string(t.vehicle_text.clone())),
                        ("ground", Value::string(t.ground.clone())),
                        ("tenor_domain", domain_value(&t.tenor_domain)),
                        ("vehicle_domain", domain_value(&t.vehicle_domain)),
                        ("coherent", Value::Bool(t.coherent)),
                    ]),
                    None => Value::Null,
                },
            ),
            ("note", Value::string(note.clone())),
        ]),
        Evidence::ValenceIncongruity(a) => Value::object([
            (
                "sentence_valence",
                Value::string(a.sentence_valence.as_str()),
            ),
            (
                "incongruent",
                match &a.incongruent {
                    Some(inc) => Value::object([
                        ("span", span_value(&inc.span)),
                        ("text", Value::string(inc.text.clone())),
                        ("literal", Value::string(inc.literal.as_str())),
                        ("figurative", Value::string(inc.figurative.as_str())),
                    ]),
                    None => Value::Null,
                },
            ),
            ("resolvable", Value::Bool(a.resolvable)),
        ]),
        Evidence::Comparison { markers, construct } => Value::object([
            (
                "markers",
                Value::Array(
                    markers
                        .iter()
                        .map(|m| {
                            Value::object([
                                ("marker", Value::string(m.marker.clone())),
                                ("span", span_value(&m.span)),
                            ])
                        })
                        .collect(),
                ),
            ),
            (
                "construct",
                match construct {
                    Some(c) => Value::object([
                        ("marker", Value::string(c.marker.marker.clone())),
                        ("marker_span", span_value(&c.marker.span)),
                        ("tenor", span_value(&c.tenor)),
                        ("tenor_text", Value::string(c.tenor_text.clone())),
                        ("vehicle", span_value(&c.vehicle)),
                        ("vehicle_text", Value::string(c.vehicle_text.clone())),
                        (
                            "tenor_domain",
                            c.tenor_domain
                                .as_ref()
                                .map(domain_value)
                                .unwrap_or(Value::Null),
                        ),
                        (
                            "vehicle_domain",
                            c.vehicle_domain
                                .as_ref()
                                .map(domain_value)
                                .unwrap_or(Value::Null),
                        ),
                        (
                            "cross_domain",
                            c.cross_domain.map(Value::Bool).unwrap_or(Value::Null),
                        ),
                    ]),
                    None => Value::Null,
                },
            ),
        ]),
        Evidence::EngineError {
            stage,
            kind,
            detail,
            digest,
        } => Value::object([
            ("stage", Value::string(stage.clone())),
            ("kind", Value::string(kind.clone())),
            ("detail", Value::string(detail.clone())),
            (
                "digest",
                match digest {
                    Some(d) => Value::string(d.to_hex()),
                    None => Value::Null,
                },
            ),
        ]),
    };
    if let Value::Object(map) = &mut v {
        map.insert("type".to_string(), Value::string(evidence.type_tag()));
    }
    v
}

pub fn target_value(target: &Target) -> Value {
    match target {
        Target::Token(i) => Value::object([
            ("kind", Value::string("token")),
            ("index", Value::Int(*i as i64)),
        ]),
        Target::Sentence => Value::object([("kind", Value::string("sentence"))]),
    }
}

fn rationale_to_value(r: &Rationale) -> Value {
    Value::object([
        ("triggering_step", Value::string(r.triggering_step.clone())),
        ("evidence", evidence_to_value(&r.evidence)),
        ("confidence", Value::string(r.confidence.as_str())),
    ])
}

pub fn record_to_value(record: &RunRecord) -> Value {
    Value::object([
        ("source_id", Value::string(record.source_id.clone())),
        ("protocol_id", Value::string(record.protocol_id.as_str())),
        (
            "config_version",
            Value::string(record.config_version.clone()),
        ),
        ("target", target_value(&record.decision.target)),
        ("label", Value::string(record.decision.label.as_str())),
        (
            "triggering_step",
            Value::string(record.rationale.triggering_step.clone()),
        ),
        ("evidence", evidence_to_value(&record.rationale.evidence)),
        (
            "confidence",
            Value::string(record.rationale.confidence.as_str()),
        ),
        (
            "llm_digests",
            Value::Array(
                record
                    .rationale
                    .llm_digests
                    .iter()
                    .map(|d| Value::string(d.to_hex()))
                    .collect(),
            ),
        ),
    ])
}

/// Serializes run records as a canonical JSON array, one record per
/// line, sorted keys throughout. Two runs are identical exactly when
/// these bytes are identical.
pub fn serialize_rationales(records: &[RunRecord]) -> String {
    let mut out = String::from("[\n");
    for (i, record) in records.iter().enumerate() {
        record_to_value(record).write(&mut out);
        if i + 1 < records.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}
