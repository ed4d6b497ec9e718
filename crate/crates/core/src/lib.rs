//! Gender-stereotype analytics over book-description corpora, plus a
//! knowledge-base driven rewriter that interchanges gender-neutral roles
//! between comparably prominent characters.
//!
//! The pipeline is split into independent stages:
//!
//! * [`corpus`] ingests book records and the companion lexicons.
//! * [`textproc`] tokenizes, tags, stems, resolves pronouns and extracts
//!   subject–verb–object triples.
//! * [`analysis`] turns processed documents into mention, adjective, verb and
//!   occupation statistics and writes plot-ready reports.
//! * [`embeddings`] and [`analogy`] build the fact-data knowledge base of
//!   analogical word pairs relative to `he`/`she`.
//! * [`graph`] builds character graphs and betweenness centrality.
//! * [`debias`] detects stereotype-consistent assignments and rewrites them.

pub mod analogy;
pub mod analysis;
pub mod corpus;
pub mod debias;
pub mod embeddings;
pub mod exec;
pub mod graph;
pub mod resources;
pub mod textproc;

pub use corpus::{BookRecord, GenderLabel, NameCensus, OccupationLexicon};
pub use exec::Execution;

/// Version string embedded in every emitted artifact.
pub const VERSION: &str = concat!("biaslens ", env!("CARGO_PKG_VERSION"));
