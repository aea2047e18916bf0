//! Structured-output schemas and the line-format parser.
//!
//! Responses are constrained to one `name: value` pair per line, names
//! ASCII, values single-line (possibly empty). A response violating its
//! schema is a format failure the caller must surface, never silently
//! repaired.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: String,
    pub required: bool,
}

impl FieldSpec {
    pub fn required(name: &str) -> FieldSpec {
        FieldSpec {
            name: name.to_string(),
            required: true,
        }
    }

    pub fn optional(name: &str) -> FieldSpec {
        FieldSpec {
            name: name.to_string(),
            required: false,
        }
    }
}

/// Named output schema: ordered field list, each required or optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredSchema {
    pub id: String,
    pub fields: Vec<FieldSpec>,
}

impl StructuredSchema {
    pub fn new(id: &str, fields: Vec<FieldSpec>) -> StructuredSchema {
        StructuredSchema {
            id: id.to_string(),
            fields,
        }
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Renders a conforming field map back to the wire format, fields in
    /// schema order, absent optional fields skipped. Inverse of
    /// [`parse_structured`] on conforming input.
    pub fn render_fields(&self, values: &BTreeMap<String, String>) -> String {
        let mut out = String::new();
        for f in &self.fields {
            if let Some(v) = values.get(&f.name) {
                out.push_str(&f.name);
                out.push_str(": ");
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }
}

/// Format failure: which required fields were missing, which lines did
/// not belong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub schema_id: String,
    pub missing: Vec<String>,
    pub extra: Vec<String>,
    pub detail: Option<String>,
}

impl SchemaViolation {
    fn new(schema_id: &str) -> SchemaViolation {
        SchemaViolation {
            schema_id: schema_id.to_string(),
            missing: Vec::new(),
            extra: Vec::new(),
            detail: None,
        }
    }

    /// Violation raised by a stage when a field's *value* is outside its
    /// domain (e.g. an unknown domain label); presence checks alone
    /// cannot catch these.
    pub fn bad_value(schema_id: &str, detail: impl Into<String>) -> SchemaViolation {
        SchemaViolation {
            schema_id: schema_id.to_string(),
            missing: Vec::new(),
            extra: Vec::new(),
            detail: Some(detail.into()),
        }
    }

    fn is_violation(&self) -> bool {
        !self.missing.is_empty() || !self.extra.is_empty() || self.detail.is_some()
    }
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema {:?} violated", self.schema_id)?;
        if !self.missing.is_empty() {
            write!(f, "; missing: {}", self.missing.join(", "))?;
        }
        if !self.extra.is_empty() {
            write!(f, "; extra: {}", self.extra.join(", "))?;
        }
        if let Some(d) = &self.detail {
            write!(f, "; {d}")?;
        }
        Ok(())
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SchemaViolation {}

/// Extracts labeled fields from `name: value` lines and validates them
/// against the schema. Blank lines are ignored; unknown or malformed
/// lines are reported as extra fields; duplicates are format failures.
pub fn parse_structured(
    response_text: &str,
    schema: &StructuredSchema,
) -> Result<BTreeMap<String, String>, SchemaViolation> {
    let mut violation = SchemaViolation::new(&schema.id);
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for line in response_text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once(':') {
            Some((name, value)) => {
                let name = name.trim();
                if schema.field(name).is_some() {
                    if values.insert(name.to_string(), value.trim().to_string()).is_some() {
                        violation.detail = Some(alloc::format!("duplicate field {name:?}"));
                    }
                } else {
                    violation.extra.push(name.to_string());
                }
            }
            None => violation.extra.push(line.to_string()),
        }
    }
    for f in &schema.fields {
        if f.required && !values.contains_key(&f.name) {
            violation.missing.push(f.name.clone());
        }
    }
    if violation.is_violation() {
        Err(violation)
    } else {
        Ok(values)
    }
}

/// Registry of structured-output schemas, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SchemaRegistry {
    schemas: BTreeMap<String, StructuredSchema>,
}

impl SchemaRegistry {
    pub fn new() -> SchemaRegistry {
        SchemaRegistry::default()
    }

    pub fn register(&mut self, schema: StructuredSchema) {
        self.schemas.insert(schema.id.clone(), schema);
    }

    pub fn get(&self, id: &str) -> Option<&StructuredSchema> {
        self.schemas.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.schemas.contains_key(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn meanings_schema() -> StructuredSchema {
        StructuredSchema::new(
            "meanings",
            vec![FieldSpec::required("contextual"), FieldSpec::required("basic")],
        )
    }

    #[test]
    fn extracts_both_fields() {
        // Line-parser oracle on the fixed format.
        let parsed =
            parse_structured("contextual: 深刻\nbasic: 空间深", &meanings_schema()).unwrap();
        assert_eq!(parsed["contextual"], "深刻");
        assert_eq!(parsed["basic"], "空间深");
    }

    #[test]
    fn empty_text_with_required_fields_fails() {
        let err = parse_structured("", &meanings_schema()).unwrap_err();
        assert_eq!(err.missing, vec!["contextual", "basic"]);
    }

    #[test]
    fn extra_line_reported() {
        let err = parse_structured(
            "contextual: a\nbasic: b\nbogus: c",
            &meanings_schema(),
        )
        .unwrap_err();
        assert_eq!(err.extra, vec!["bogus"]);
    }

    #[test]
    fn malformed_line_reported_as_extra() {
        let err =
            parse_structured("contextual: a\nbasic: b\nnot a field line", &meanings_schema())
                .unwrap_err();
        assert_eq!(err.extra, vec!["not a field line"]);
    }

    #[test]
    fn duplicate_field_is_a_violation() {
        let err = parse_structured(
            "contextual: a\ncontextual: b\nbasic: c",
            &meanings_schema(),
        )
        .unwrap_err();
        assert!(err.detail.unwrap().contains("duplicate"));
    }

    #[test]
    fn optional_fields_may_be_absent() {
        let schema = StructuredSchema::new(
            "flags",
            vec![
                FieldSpec::required("contrasts"),
                FieldSpec::optional("implicit"),
            ],
        );
        let parsed = parse_structured("contrasts: yes", &schema).unwrap();
        assert_eq!(parsed.len(), 1);
    }

    #[test]
    fn empty_values_are_allowed() {
        let schema = StructuredSchema::new("g", vec![FieldSpec::required("ground")]);
        let parsed = parse_structured("ground:", &schema).unwrap();
        assert_eq!(parsed["ground"], "");
    }

    #[test]
    fn render_parse_roundtrip_is_identity() {
        let schema = meanings_schema();
        let mut values = BTreeMap::new();
        values.insert("contextual".to_string(), "深刻".to_string());
        values.insert("basic".to_string(), "空间深度".to_string());
        let rendered = schema.render_fields(&values);
        assert_eq!(parse_structured(&rendered, &schema).unwrap(), values);
    }
}
