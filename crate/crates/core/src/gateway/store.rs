//! Content-addressed exchange cache.
//!
//! The cache is append-only: an entry, once recorded under its digest,
//! never changes. Re-recording the identical exchange is a no-op;
//! recording different content under an existing digest is a conflict
//! and an error. Timestamps are bookkeeping only and excluded from the
//! digest.

use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use super::request::{cache_key, LLMRequest, RequestDigest};

/// A recorded exchange: the request, its digest, and the raw response.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CacheEntry {
    pub digest: RequestDigest,
    pub request: LLMRequest,
    pub raw_text: String,
    /// Excluded from the digest.
    #[cfg_attr(feature = "serde", serde(default))]
    pub created_at: Option<String>,
}

impl CacheEntry {
    pub fn record(request: LLMRequest, raw_text: impl Into<String>) -> CacheEntry {
        let digest = cache_key(&request);
        CacheEntry {
            digest,
            request,
            raw_text: raw_text.into(),
            created_at: None,
        }
    }

    /// Recomputing the digest from the stored request must reproduce the
    /// stored digest.
    pub fn verify(&self) -> bool {
        cache_key(&self.request) == self.digest
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreError {
    /// Append-only violation: same digest, different content.
    Conflict(RequestDigest),
    /// Backing-store failure (IO and similar); text is implementation
    /// specific.
    Backend(String),
}

impl fmt::Display for StoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreError::Conflict(d) => write!(f, "cache conflict for digest {d}"),
            StoreError::Backend(msg) => write!(f, "cache backend error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StoreError {}

/// Storage behind the gateway. Implementations must serialize writes;
/// reads may be concurrent. Entries are immutable once recorded.
pub trait CacheStore {
    fn get(&self, digest: &RequestDigest) -> Option<CacheEntry>;
    fn put(&self, entry: CacheEntry) -> Result<(), StoreError>;
    fn digests(&self) -> Vec<RequestDigest>;

    fn contains(&self, digest: &RequestDigest) -> bool {
        self.get(digest).is_some()
    }
}

/// In-memory store for tests and single-threaded use (not `Sync`; the
/// file-backed store in the companion crate is the concurrent one).
#[derive(Debug, Default)]
pub struct MemoryStore {
    entries: RefCell<alloc::collections::BTreeMap<RequestDigest, CacheEntry>>,
}

impl MemoryStore {
    pub fn new() -> MemoryStore {
        MemoryStore::default()
    }

    pub fn len(&self) -> usize {
        self.entries.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.borrow().is_empty()
    }

    /// Test hook: overwrite an entry's response in place, bypassing the
    /// append-only rule, to simulate a tampered cache.
    pub fn corrupt(&self, digest: &RequestDigest, raw_text: impl Into<String>) -> bool {
        match self.entries.borrow_mut().get_mut(digest) {
            Some(e) => {
                e.raw_text = raw_text.into();
                true
            }
            None => false,
        }
    }
}

impl CacheStore for MemoryStore {
    fn get(&self, digest: &RequestDigest) -> Option<CacheEntry> {
        self.entries.borrow().get(digest).cloned()
    }

    fn put(&self, entry: CacheEntry) -> Result<(), StoreError> {
        let mut entries = self.entries.borrow_mut();
        if let Some(existing) = entries.get(&entry.digest) {
            if existing.raw_text == entry.raw_text && existing.request == entry.request {
                return Ok(());
            }
            return Err(StoreError::Conflict(entry.digest));
        }
        entries.insert(entry.digest, entry);
        Ok(())
    }

    fn digests(&self) -> Vec<RequestDigest> {
        self.entries.borrow().keys().copied().collect()
    }
}
