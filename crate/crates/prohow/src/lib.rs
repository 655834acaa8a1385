//! Batch pipeline for turning semi-structured how-to documents into a
//! lightweight Linked Data process graph, linking the result against an
//! entity catalog, discovering decomposition links between processes, and
//! scoring link quality.
//!
//! Modules follow the pipeline stages:
//!
//! - [`graph`] — vocabulary, entity/relation model, canonical RDF I/O
//! - [`ingest`] — canonical document format and source adapters
//! - [`extract`] — documents to graph fragments
//! - [`link`] — catalog lookup, input/output links, I/O link composition
//! - [`decompose`] — index, candidate retrieval, feature classification
//! - [`eval`] — precision / count / coverage metrics and reports
//! - [`synth`] — deterministic synthetic fixtures for tests and demos

pub mod decompose;
pub mod eval;
pub mod extract;
pub mod graph;
pub mod ingest;
pub mod link;
pub mod synth;
pub mod util;
