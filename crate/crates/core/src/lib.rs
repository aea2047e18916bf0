//! Core engine for protocol-driven metaphor identification in Chinese text.
//!
//! Everything in this crate is deterministic and allocation-only: text
//! preprocessing, the four identification protocols, the LLM gateway
//! abstractions (request canonicalisation, caching, replay), evaluation
//! metrics, and the audit primitives. No IO happens here; file formats,
//! corpus loaders, and the command-line interface live in the companion
//! `biyu` crate.
//!
//! The crate is `no_std` with `alloc`. Enable the `std` feature to get
//! `std::error::Error` impls on the error types.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod audit;
pub mod canon;
pub mod dataset;
pub mod gateway;
pub mod metrics;
pub mod protocol;
pub mod protocols;
pub mod rng;
pub mod textprep;
