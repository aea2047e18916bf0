//! Request model and content-addressed digests.
//!
//! A request is canonically encoded as length-prefixed UTF-8 fields in a
//! fixed order and hashed with SHA-256; the digest is the cache key. The
//! encoding is:
//!
//! ```text
//! field(b)      = u32 big-endian byte length of b, then b
//! encode(req)   = field(template_id)
//!              || u32 BE slot count
//!              || for each slot sorted by name: field(name) field(value)
//!              || field(temperature canonical text)
//!              || u32 BE max_tokens
//!              || field(schema_id)
//! ```
//!
//! Timestamps and any other bookkeeping are deliberately outside the
//! encoding, so re-recording an exchange never changes its address.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest as _, Sha256};

/// Sampling temperature as an exact rational, so the digest never
/// depends on float formatting. Standard operation pins it to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Temperature {
    num: u32,
    den: u32,
}

impl Temperature {
    pub const ZERO: Temperature = Temperature { num: 0, den: 1 };

    /// Reduced rational `num/den`. Panics if `den == 0`.
    pub fn new(num: u32, den: u32) -> Temperature {
        assert!(den != 0, "temperature denominator must be nonzero");
        let g = gcd(num.max(1), den);
        Temperature {
            num: num / if num == 0 { 1 } else { g },
            den: if num == 0 { 1 } else { den / g },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Canonical text: `"0"`, `"1"`, or `"7/10"` (reduced, no spaces).
    pub fn canonical_text(&self) -> String {
        if self.den == 1 {
            self.num.to_string()
        } else {
            alloc::format!("{}/{}", self.num, self.den)
        }
    }

    pub fn parse(s: &str) -> Option<Temperature> {
        match s.split_once('/') {
            Some((n, d)) => {
                let num = n.parse().ok()?;
                let den: u32 = d.parse().ok()?;
                if den == 0 {
                    return None;
                }
                Some(Temperature::new(num, den))
            }
            None => Some(Temperature::new(s.parse().ok()?, 1)),
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(feature = "serde")]
impl serde::Serialize for Temperature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical_text())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Temperature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Temperature, D::Error> {
        let s = String::deserialize(d)?;
        Temperature::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(alloc::format!("bad temperature {s:?}")))
    }
}

/// 32-byte content hash of a canonical request encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestDigest(pub [u8; 32]);

impl RequestDigest {
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(64);
        for b in self.0 {
            s.push(HEX[(b >> 4) as usize]);
            s.push(HEX[(b & 0xf) as usize]);
        }
        s
    }

    pub fn from_hex(s: &str) -> Option<RequestDigest> {
        if s.len() != 64 {
            return None;
        }
        let mut bytes = [0u8; 32];
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            let hi = hex_val(chunk[0])?;
            let lo = hex_val(chunk[1])?;
            bytes[i] = (hi << 4) | lo;
        }
        Some(RequestDigest(bytes))
    }
}

const HEX: [char; 16] = [
    '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', 'a', 'b', 'c', 'd', 'e', 'f',
];

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

impl fmt::Display for RequestDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for RequestDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for RequestDigest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<RequestDigest, D::Error> {
        let s = String::deserialize(d)?;
        RequestDigest::from_hex(&s)
            .ok_or_else(|| serde::de::Error::custom(alloc::format!("bad digest {s:?}")))
    }
}

/// One constrained LLM subtask call: a registered template, its slot
/// values, fixed decoding parameters, and the id of the structured
/// output schema the response must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LLMRequest {
    pub template_id: String,
    /// Slot values in insertion order; the digest sorts them by name.
    pub slots: Vec<(String, String)>,
    pub temperature: Temperature,
    pub max_tokens: u32,
    pub schema_id: String,
}

pub const DEFAULT_MAX_TOKENS: u32 = 2048;

impl LLMRequest {
    pub fn new(
        template_id: impl Into<String>,
        slots: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
        schema_id: impl Into<String>,
    ) -> LLMRequest {
        LLMRequest {
            template_id: template_id.into(),
            slots: slots
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            temperature: Temperature::ZERO,
            max_tokens: DEFAULT_MAX_TOKENS,
            schema_id: schema_id.into(),
        }
    }

    pub fn slot(&self, name: &str) -> Option<&str> {
        self.slots
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// Canonical length-prefixed encoding (see module docs).
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let mut out = Vec::new();
        push_field(&mut out, self.template_id.as_bytes());
        let mut sorted: Vec<&(String, String)> = self.slots.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend_from_slice(&(sorted.len() as u32).to_be_bytes());
        for (name, value) in sorted {
            push_field(&mut out, name.as_bytes());
            push_field(&mut out, value.as_bytes());
        }
        push_field(&mut out, self.temperature.canonical_text().as_bytes());
        out.extend_from_slice(&self.max_tokens.to_be_bytes());
        push_field(&mut out, self.schema_id.as_bytes());
        out
    }
}

fn push_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

/// Content digest of the canonical request encoding; stable across runs
/// and platforms, independent of slot insertion order and of anything
/// not in the encoding (timestamps, backend, raw responses).
pub fn cache_key(request: &LLMRequest) -> RequestDigest {
    RequestDigest(sha256(&request.canonical_encoding()))
}

/// SHA-256 over arbitrary bytes; the digest primitive everything here
/// shares (cache keys, trace summaries, manifest hashes).
pub fn sha256(data: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(data);
    hasher.finalize().into()
}
