//! Process graph model: the three-property vocabulary, URI-identified
//! entities, provenance annotations, and canonical RDF serialization.

pub mod model;
pub mod ntriples;
pub mod rdf;
pub mod turtle;
pub mod uri;
pub mod vocab;

use thiserror::Error;

pub use model::{
    Annotation, EntityKind, KnowHowGraph, Origin, ProcessEntity, Property, RawTriple, RdfNode,
    Relation, Selector, TriplePattern,
};
pub use rdf::RdfError;
pub use uri::{mint_uri, EntityUri};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid path {path:?}: {reason}")]
    InvalidPath { path: String, reason: String },
    #[error("invalid IRI {iri:?}: {reason}")]
    InvalidIri { iri: String, reason: String },
    #[error("entity <{uri}> already present")]
    DuplicateEntity { uri: String },
    #[error("entity <{uri}> has an empty label")]
    EmptyLabel { uri: String },
    #[error("relation endpoint <{uri}> is not in the graph")]
    DanglingEndpoint { uri: String },
    #[error("relation would connect <{uri}> to itself")]
    SelfLoop { uri: String },
    #[error("entity <{uri}> already has an annotation")]
    DuplicateAnnotation { uri: String },
    #[error("unknown entity <{uri}>")]
    UnknownEntity { uri: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

/// Serialize a graph. Output is canonical: triple ordering is lexicographic
/// by (subject, property, object), so equal graphs produce identical bytes.
pub fn serialize(graph: &KnowHowGraph, format: RdfFormat) -> String {
    match format {
        RdfFormat::NTriples => ntriples::serialize(graph),
        RdfFormat::Turtle => turtle::serialize(graph),
    }
}

/// Parse a serialized graph. Triples outside the core vocabulary are kept in
/// the graph's side list rather than dropped.
pub fn parse(bytes: &[u8], format: RdfFormat) -> Result<KnowHowGraph, RdfError> {
    match format {
        RdfFormat::NTriples => ntriples::parse(bytes),
        RdfFormat::Turtle => turtle::parse(bytes),
    }
}
