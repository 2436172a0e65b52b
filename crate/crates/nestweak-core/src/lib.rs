//! Span-level algorithms for recovering nested entity structure from flat
//! (outermost-only) annotations: inclusion mining by exact and lemmatized
//! surface matching, entity corruption with offset bookkeeping, candidate-span
//! neutralization, containment-based inner/outer evaluation, and prompt
//! construction / response parsing for LLM-assisted extraction.
//!
//! Everything in this crate is pure and deterministic: no IO, no clocks, no
//! global state. Randomized operations take explicit seeds and draw from
//! ChaCha streams so results are reproducible across platforms. File formats,
//! networking, and the command-line interface live in the companion
//! `nestweak` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod brat;
pub mod corruption;
pub mod error;
pub mod evaluation;
pub mod inclusions;
pub mod lemma;
pub mod llm;
pub mod nesting;
pub mod neutralization;
pub mod types;

pub use error::CoreError;
pub use types::{Corpus, Document, Mention, Span};
