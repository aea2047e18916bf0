//! Stub backend fixtures.
//!
//! A stub is a caller-supplied deterministic table: given a request (and
//! its digest), it either produces the canned raw response or reports a
//! miss. [`FixtureTable`] is the exact-match table keyed by digest or
//! template id; [`RuleTable`] wraps a deterministic function for bulk
//! synthetic fixtures where enumerating digests would be unwieldy.

use alloc::collections::BTreeMap;
use alloc::string::String;

use super::request::{cache_key, LLMRequest, RequestDigest};

/// Deterministic response table backing the stub backend.
pub trait StubTable {
    fn lookup(&self, request: &LLMRequest, digest: &RequestDigest) -> Option<String>;
}

/// Exact-match fixture table. Digest entries win over template entries.
#[derive(Debug, Clone, Default)]
pub struct FixtureTable {
    by_digest: BTreeMap<RequestDigest, String>,
    by_template: BTreeMap<String, String>,
}

impl FixtureTable {
    pub fn new() -> FixtureTable {
        FixtureTable::default()
    }

    pub fn insert_digest(&mut self, digest: RequestDigest, response: impl Into<String>) {
        self.by_digest.insert(digest, response.into());
    }

    /// Keys the response by the digest of `request`; the fixture author
    /// builds the same request the pipeline will issue.
    pub fn insert_for(&mut self, request: &LLMRequest, response: impl Into<String>) {
        self.by_digest.insert(cache_key(request), response.into());
    }

    /// Fallback response for every request of a template.
    pub fn insert_template(&mut self, template_id: impl Into<String>, response: impl Into<String>) {
        self.by_template.insert(template_id.into(), response.into());
    }

    pub fn len(&self) -> usize {
        self.by_digest.len() + self.by_template.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_digest.is_empty() && self.by_template.is_empty()
    }
}

impl StubTable for FixtureTable {
    fn lookup(&self, request: &LLMRequest, digest: &RequestDigest) -> Option<String> {
        self.by_digest
            .get(digest)
            .or_else(|| self.by_template.get(&request.template_id))
            .cloned()
    }
}

/// Deterministic rule-based table; the closure must be a pure function
/// of the request.
pub struct RuleTable<F: Fn(&LLMRequest) -> Option<String>>(pub F);

impl<F: Fn(&LLMRequest) -> Option<String>> StubTable for RuleTable<F> {
    fn lookup(&self, request: &LLMRequest, _digest: &RequestDigest) -> Option<String> {
        (self.0)(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn digest_entry_beats_template_entry() {
        let req = LLMRequest::new("basic_meaning", vec![("word", "深")], "s");
        let other = LLMRequest::new("basic_meaning", vec![("word", "浅")], "s");
        let mut table = FixtureTable::new();
        table.insert_template("basic_meaning", "basic: generic");
        table.insert_for(&req, "basic: 空间深度");
        assert_eq!(
            table.lookup(&req, &cache_key(&req)).unwrap(),
            "basic: 空间深度"
        );
        assert_eq!(
            table.lookup(&other, &cache_key(&other)).unwrap(),
            "basic: generic"
        );
    }

    #[test]
    fn miss_when_nothing_matches() {
        let table = FixtureTable::new();
        let req = LLMRequest::new("t", vec![("a", "b")], "s");
        assert!(table.lookup(&req, &cache_key(&req)).is_none());
    }

    #[test]
    fn rule_table_is_a_pure_function_of_the_request() {
        let table = RuleTable(|req: &LLMRequest| {
            req.slot("word").map(|w| alloc::format!("gloss: {w}-gloss"))
        });
        let req = LLMRequest::new("t", vec![("word", "梦")], "s");
        let d = cache_key(&req);
        assert_eq!(table.lookup(&req, &d).unwrap(), "gloss: 梦-gloss");
        assert_eq!(table.lookup(&req, &d).unwrap(), "gloss: 梦-gloss");
    }
}
