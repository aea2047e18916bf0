//! Prompt templates with `{slot}` placeholders.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use core::fmt;

/// Registry of prompt templates, keyed by id. Placeholders are `{name}`
/// where `name` is `[A-Za-z0-9_]+`; anything else in braces is literal
/// text.
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    UnknownTemplate(String),
    MissingSlot(String),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::UnknownTemplate(id) => write!(f, "unknown template {id:?}"),
            RenderError::MissingSlot(name) => write!(f, "missing slot {name:?}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RenderError {}

impl TemplateRegistry {
    pub fn new() -> TemplateRegistry {
        TemplateRegistry::default()
    }

    pub fn register(&mut self, id: impl Into<String>, text: impl Into<String>) {
        self.templates.insert(id.into(), text.into());
    }

    pub fn contains(&self, id: &str) -> bool {
        self.templates.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(|s| s.as_str())
    }

    /// Slot names a template requires.
    pub fn slot_names(&self, id: &str) -> Result<BTreeSet<String>, RenderError> {
        let text = self
            .templates
            .get(id)
            .ok_or_else(|| RenderError::UnknownTemplate(id.to_string()))?;
        let mut names = BTreeSet::new();
        scan(text, |part| {
            if let Part::Slot(name) = part {
                names.insert(name.to_string());
            }
        });
        Ok(names)
    }

    /// Deterministic substitution; every placeholder must be filled.
    pub fn render(
        &self,
        id: &str,
        slots: &[(String, String)],
    ) -> Result<String, RenderError> {
        let text = self
            .templates
            .get(id)
            .ok_or_else(|| RenderError::UnknownTemplate(id.to_string()))?;
        let mut out = String::with_capacity(text.len());
        let mut missing: Option<String> = None;
        scan(text, |part| match part {
            Part::Literal(s) => out.push_str(s),
            Part::Slot(name) => {
                match slots.iter().find(|(k, _)| k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        if missing.is_none() {
                            missing = Some(name.to_string());
                        }
                    }
                }
            }
        });
        match missing {
            Some(name) => Err(RenderError::MissingSlot(name)),
            None => Ok(out),
        }
    }
}

enum Part<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

fn scan<'a>(text: &'a str, mut emit: impl FnMut(Part<'a>)) {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut lit_start = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(close) = text[i + 1..].find('}') {
                let name = &text[i + 1..i + 1 + close];
                let valid = !name.is_empty()
                    && name
                        .bytes()
                        .all(|b| b.is_ascii_alphanumeric() || b == b'_');
                if valid {
                    if lit_start < i {
                        emit(Part::Literal(&text[lit_start..i]));
                    }
                    emit(Part::Slot(name));
                    i += name.len() + 2;
                    lit_start = i;
                    continue;
                }
            }
        }
        // Advance one full UTF-8 character.
        i += utf8_len(bytes[i]);
    }
    if lit_start < text.len() {
        emit(Part::Literal(&text[lit_start..]));
    }
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7F => 1,
        0xC0..=0xDF => 2,
        0xE0..=0xEF => 3,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reg() -> TemplateRegistry {
        let mut r = TemplateRegistry::new();
        r.register("echo", "echo {x}");
        r.register("two", "w={word} in s={sentence}");
        r.register("braces", "literal {not a slot} and {x}");
        r
    }

    #[test]
    fn direct_substitution() {
        let out = reg()
            .render("echo", &[("x".to_string(), "甲".to_string())])
            .unwrap();
        assert_eq!(out, "echo 甲");
    }

    #[test]
    fn missing_slot_is_an_error() {
        let err = reg().render("echo", &[]).unwrap_err();
        assert_eq!(err, RenderError::MissingSlot("x".to_string()));
    }

    #[test]
    fn unknown_template_is_an_error() {
        let err = reg().render("nope", &[]).unwrap_err();
        assert_eq!(err, RenderError::UnknownTemplate("nope".to_string()));
    }

    #[test]
    fn invalid_brace_runs_are_literal() {
        let out = reg()
            .render("braces", &[("x".to_string(), "1".to_string())])
            .unwrap();
        assert_eq!(out, "literal {not a slot} and 1");
    }

    #[test]
    fn slot_names_listed() {
        let names = reg().slot_names("two").unwrap();
        assert_eq!(
            names.into_iter().collect::<vec::Vec<_>>(),
            vec!["sentence".to_string(), "word".to_string()]
        );
    }

    #[test]
    fn no_unresolved_placeholders_remain() {
        let out = reg()
            .render(
                "two",
                &[
                    ("word".to_string(), "深".to_string()),
                    ("sentence".to_string(), "海很深。".to_string()),
                ],
            )
            .unwrap();
        assert!(out.contains("深") && out.contains("海很深。"));
        assert!(!out.contains('{'));
    }
}
