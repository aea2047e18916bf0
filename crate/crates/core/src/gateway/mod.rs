//! Constrained, cacheable, replayable LLM subroutine calls.
//!
//! Every call is one narrowly scoped subtask: render a registered
//! template, obtain the raw response from the configured backend, record
//! it in the content-addressed cache, and parse it against the declared
//! output schema. The replay backend serves recorded responses byte for
//! byte, which is what makes whole runs reproducible; the stub backend
//! serves caller-supplied fixtures through the same path.

mod defaults;
mod request;
mod schema;
mod store;
mod stub;
pub mod template;

pub use defaults::{default_schemas, default_templates};
pub use request::{cache_key, sha256, LLMRequest, RequestDigest, Temperature, DEFAULT_MAX_TOKENS};
pub use schema::{parse_structured, FieldSpec, SchemaRegistry, SchemaViolation, StructuredSchema};
pub use store::{CacheEntry, CacheStore, MemoryStore, StoreError};
pub use stub::{FixtureTable, RuleTable, StubTable};
pub use template::{RenderError, TemplateRegistry};

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

/// Which backend produced a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BackendKind {
    Live,
    Replay,
    Stub,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
            BackendKind::Stub => "stub",
        }
    }

    pub fn parse(s: &str) -> Option<BackendKind> {
        match s {
            "live" => Some(BackendKind::Live),
            "replay" => Some(BackendKind::Replay),
            "stub" => Some(BackendKind::Stub),
            _ => None,
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// HTTP (or other) transport for the live backend; implemented in the
/// companion crate, optional at build time.
pub trait Transport {
    fn send(&self, prompt: &str, request: &LLMRequest) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    pub detail: String,
}

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "transport error: {}", self.detail)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TransportError {}

/// Backend selection for a gateway.
pub enum Backend<'a> {
    /// Serve recorded responses only; a missing digest is an error.
    Replay,
    /// Serve fixtures from a deterministic table, recording them into
    /// the cache so a later replay resolves the same digests.
    Stub(&'a dyn StubTable),
    /// Round-trip over a transport, recording responses into the cache.
    Live(&'a dyn Transport),
}

impl Backend<'_> {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Replay => BackendKind::Replay,
            Backend::Stub(_) => BackendKind::Stub,
            Backend::Live(_) => BackendKind::Live,
        }
    }
}

/// A completed exchange: raw response text plus the schema-validated
/// field map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LLMResponse {
    pub raw_text: String,
    pub parsed: Option<BTreeMap<String, String>>,
    pub backend: BackendKind,
    pub digest: RequestDigest,
}

impl LLMResponse {
    /// Parsed field value; empty string when the field is absent.
    pub fn field(&self, name: &str) -> &str {
        self.parsed
            .as_ref()
            .and_then(|m| m.get(name))
            .map(String::as_str)
            .unwrap_or("")
    }

    pub fn field_opt(&self, name: &str) -> Option<&str> {
        self.parsed
            .as_ref()
            .and_then(|m| m.get(name))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GatewayError {
    Render(RenderError),
    UnknownSchema(String),
    /// Replay had no entry for the digest, or the stub table missed.
    CacheMiss(RequestDigest),
    Transport(TransportError),
    /// Response text did not satisfy the schema; the exchange is still
    /// recorded in the cache.
    SchemaViolation(SchemaViolation),
    Store(StoreError),
}

impl GatewayError {
    /// Short stable kind tag for rationales and error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            GatewayError::Render(RenderError::UnknownTemplate(_)) => "unknown-template",
            GatewayError::Render(RenderError::MissingSlot(_)) => "missing-slot",
            GatewayError::UnknownSchema(_) => "unknown-schema",
            GatewayError::CacheMiss(_) => "cache-miss",
            GatewayError::Transport(_) => "transport-error",
            GatewayError::SchemaViolation(_) => "schema-violation",
            GatewayError::Store(_) => "store-error",
        }
    }

    pub fn digest(&self) -> Option<RequestDigest> {
        match self {
            GatewayError::CacheMiss(d) => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for GatewayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GatewayError::Render(e) => e.fmt(f),
            GatewayError::UnknownSchema(id) => write!(f, "unknown schema {id:?}"),
            GatewayError::CacheMiss(d) => write!(f, "cache miss for digest {d}"),
            GatewayError::Transport(e) => e.fmt(f),
            GatewayError::SchemaViolation(v) => v.fmt(f),
            GatewayError::Store(e) => e.fmt(f),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GatewayError {}

impl From<RenderError> for GatewayError {
    fn from(e: RenderError) -> Self {
        GatewayError::Render(e)
    }
}

impl From<SchemaViolation> for GatewayError {
    fn from(e: SchemaViolation) -> Self {
        GatewayError::SchemaViolation(e)
    }
}

impl From<StoreError> for GatewayError {
    fn from(e: StoreError) -> Self {
        GatewayError::Store(e)
    }
}

/// The gateway: template + schema registries, a cache store, and the
/// selected backend. Calls are pure given the backend and cache state.
pub struct Gateway<'a> {
    pub templates: &'a TemplateRegistry,
    pub schemas: &'a SchemaRegistry,
    pub store: &'a dyn CacheStore,
    pub backend: Backend<'a>,
}

impl<'a> Gateway<'a> {
    pub fn new(
        templates: &'a TemplateRegistry,
        schemas: &'a SchemaRegistry,
        store: &'a dyn CacheStore,
        backend: Backend<'a>,
    ) -> Gateway<'a> {
        Gateway {
            templates,
            schemas,
            store,
            backend,
        }
    }

    pub fn render_prompt(&self, request: &LLMRequest) -> Result<String, GatewayError> {
        Ok(self.templates.render(&request.template_id, &request.slots)?)
    }

    /// Executes one constrained call. Live and stub responses are
    /// recorded into the cache before parsing, so format failures are
    /// still replayable; replay reads without writing.
    pub fn call(&self, request: &LLMRequest) -> Result<LLMResponse, GatewayError> {
        let digest = cache_key(request);
        let schema = self
            .schemas
            .get(&request.schema_id)
            .ok_or_else(|| GatewayError::UnknownSchema(request.schema_id.clone()))?;
        let raw_text = match &self.backend {
            Backend::Replay => {
                self.store
                    .get(&digest)
                    .ok_or(GatewayError::CacheMiss(digest))?
                    .raw_text
            }
            Backend::Stub(table) => {
                // Render even though the text is unused: this validates
                // the template id and slot cover exactly as live would.
                self.render_prompt(request)?;
                let raw = table
                    .lookup(request, &digest)
                    .ok_or(GatewayError::CacheMiss(digest))?;
                self.store
                    .put(CacheEntry::record(request.clone(), raw.clone()))?;
                raw
            }
            Backend::Live(transport) => {
                let prompt = self.render_prompt(request)?;
                let raw = transport
                    .send(&prompt, request)
                    .map_err(GatewayError::Transport)?;
                self.store
                    .put(CacheEntry::record(request.clone(), raw.clone()))?;
                raw
            }
        };
        let parsed = parse_structured(&raw_text, schema)?;
        Ok(LLMResponse {
            raw_text,
            parsed: Some(parsed),
            backend: self.backend.kind(),
            digest,
        })
    }
}
