//! Guitar tablature token toolkit.
//!
//! Parses whitespace-delimited tablature token streams, decodes them into
//! timed note events, computes per-guitarist style features and statistics,
//! manages labeled corpora, and runs a small artist-conditioned token
//! language model with a matching guitarist classifier.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod musicology;
pub mod stats;
pub mod stylelm;
pub mod tokens;
