//! Built-in prompt templates and output schemas for the four protocols.
//!
//! Each template scopes the model to a single analytical subtask and
//! states the exact line format the response must use; the paired schema
//! enforces that format. Values are single-line; an empty value encodes
//! "none found".

use alloc::vec;

use super::schema::{FieldSpec, SchemaRegistry, StructuredSchema};
use super::template::TemplateRegistry;

pub fn default_templates() -> TemplateRegistry {
    let mut reg = TemplateRegistry::new();
    reg.register(
        "mip_contextual",
        "Sentence: {sentence}\nWord: {word}\n\
         Give the meaning of the word as it is used in this sentence.\n\
         Answer with exactly one line:\ncontextual: <meaning>",
    );
    reg.register(
        "mip_meanings",
        "Sentence: {sentence}\nWord: {word}\n\
         Give (1) the meaning of the word as used in this sentence and \
         (2) its most basic, concrete meaning across all of its uses.\n\
         Answer with exactly two lines:\ncontextual: <meaning>\nbasic: <meaning>",
    );
    reg.register(
        "mip_contrast",
        "Word: {word}\nSentence: {sentence}\nContextual meaning: {contextual}\n\
         Basic meaning: {basic}\n\
         Does the contextual meaning contrast with the basic meaning, and can it \
         be understood by comparison with it? If the word signals an implicit \
         comparison through ellipsis or substitution, note that as well.\n\
         Answer with lines:\ncontrasts: <yes|no>\ncomprehensible: <yes|no>\n\
         implicit: <none|ellipsis|substitution>",
    );
    reg.register(
        "mapping_vehicle",
        "Sentence: {sentence}\n\
         Identify the expression, if any, that is used in a domain other than its \
         literal one (the vehicle). Quote it exactly as it appears in the sentence; \
         leave the value empty if there is none.\n\
         Answer with exactly one line:\nvehicle: <expression or empty>",
    );
    reg.register(
        "mapping_tenor",
        "Sentence: {sentence}\nVehicle: {vehicle}\n\
         Identify the concept the vehicle describes (the tenor). Quote it exactly \
         as it appears in the sentence; leave the value empty if there is none.\n\
         Answer with exactly one line:\ntenor: <expression or empty>",
    );
    reg.register(
        "mapping_ground",
        "Sentence: {sentence}\nTenor: {tenor}\nVehicle: {vehicle}\n\
         State the shared property that motivates describing the tenor through \
         the vehicle (the ground). Leave the value empty if it is implicit and \
         cannot be stated.\n\
         Answer with exactly one line:\nground: <property or empty>",
    );
    reg.register(
        "mapping_domains",
        "Tenor: {tenor}\nVehicle: {vehicle}\n\
         Assign each expression to exactly one conceptual domain from this list: \
         {taxonomy}.\n\
         Answer with exactly two lines:\ntenor_domain: <domain>\nvehicle_domain: <domain>",
    );
    reg.register(
        "valence_overall",
        "Sentence: {sentence}\n\
         State the dominant emotional valence of the sentence.\n\
         Answer with exactly one line:\nvalence: <positive|negative|neutral|mixed>",
    );
    reg.register(
        "valence_incongruity",
        "Sentence: {sentence}\n\
         Find a constituent expression whose emotional charge in context is \
         incongruent with its literal meaning. Quote it exactly as it appears; \
         leave the value empty if there is none. If present, also give its \
         literal valence and its valence in context.\n\
         Answer with lines:\nexpression: <text or empty>\n\
         literal: <positive|negative|neutral|mixed or empty>\n\
         figurative: <positive|negative|neutral|mixed or empty>",
    );
    reg.register(
        "valence_resolution",
        "Sentence: {sentence}\nExpression: {expression}\n\
         Can the emotional incongruity of this expression be resolved by reading \
         it figuratively?\n\
         Answer with exactly one line:\nresolvable: <yes|no>",
    );
    reg.register(
        "simile_extract",
        "Sentence: {sentence}\nComparison marker: {marker}\n\
         Extract the two sides of the comparison, quoted exactly as they appear \
         in the sentence: the tenor (what is described) and the vehicle (what it \
         is compared to).\n\
         Answer with exactly two lines:\ntenor: <expression>\nvehicle: <expression>",
    );
    reg.register(
        "simile_domains",
        "Tenor: {tenor}\nVehicle: {vehicle}\n\
         Assign each expression to exactly one conceptual domain from this list: \
         {taxonomy}.\n\
         Answer with exactly two lines:\ntenor_domain: <domain>\nvehicle_domain: <domain>",
    );
    reg
}

pub fn default_schemas() -> SchemaRegistry {
    let mut reg = SchemaRegistry::new();
    reg.register(StructuredSchema::new(
        "mip_contextual",
        vec![FieldSpec::required("contextual")],
    ));
    reg.register(StructuredSchema::new(
        "mip_meanings",
        vec![
            FieldSpec::required("contextual"),
            FieldSpec::required("basic"),
        ],
    ));
    reg.register(StructuredSchema::new(
        "mip_contrast",
        vec![
            FieldSpec::required("contrasts"),
            FieldSpec::required("comprehensible"),
            FieldSpec::optional("implicit"),
        ],
    ));
    reg.register(StructuredSchema::new(
        "mapping_vehicle",
        vec![FieldSpec::required("vehicle")],
    ));
    reg.register(StructuredSchema::new(
        "mapping_tenor",
        vec![FieldSpec::required("tenor")],
    ));
    reg.register(StructuredSchema::new(
        "mapping_ground",
        vec![FieldSpec::required("ground")],
    ));
    reg.register(StructuredSchema::new(
        "mapping_domains",
        vec![
            FieldSpec::required("tenor_domain"),
            FieldSpec::required("vehicle_domain"),
        ],
    ));
    reg.register(StructuredSchema::new(
        "valence_overall",
        vec![FieldSpec::required("valence")],
    ));
    reg.register(StructuredSchema::new(
        "valence_incongruity",
        vec![
            FieldSpec::required("expression"),
            FieldSpec::optional("literal"),
            FieldSpec::optional("figurative"),
        ],
    ));
    reg.register(StructuredSchema::new(
        "valence_resolution",
        vec![FieldSpec::required("resolvable")],
    ));
    reg.register(StructuredSchema::new(
        "simile_extract",
        vec![FieldSpec::required("tenor"), FieldSpec::required("vehicle")],
    ));
    reg.register(StructuredSchema::new(
        "simile_domains",
        vec![
            FieldSpec::required("tenor_domain"),
            FieldSpec::required("vehicle_domain"),
        ],
    ));
    reg
}
