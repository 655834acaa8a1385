//! Namespaces and term IRIs used by the graph serializations.

/// The three-property process vocabulary.
pub const PROHOW_NS: &str = "http://vocab.inf.ed.ac.uk/prohow#";
/// Artifact metadata terms (entity kinds, provenance fields, categories).
pub const META_NS: &str = "http://w3id.org/prohow/meta#";
/// Open Annotation terms used for provenance records.
pub const OA_NS: &str = "http://www.w3.org/ns/oa#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// Default base namespace for minted entity URIs.
pub const DEFAULT_DATA_NS: &str = "http://w3id.org/prohow/data";

pub const HAS_STEP: &str = "http://vocab.inf.ed.ac.uk/prohow#has_step";
pub const HAS_METHOD: &str = "http://vocab.inf.ed.ac.uk/prohow#has_method";
pub const REQUIRES: &str = "http://vocab.inf.ed.ac.uk/prohow#requires";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_STATEMENT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Statement";
pub const RDF_SUBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
pub const RDF_PREDICATE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
pub const RDF_OBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

pub const OA_ANNOTATION: &str = "http://www.w3.org/ns/oa#Annotation";
pub const OA_HAS_TARGET: &str = "http://www.w3.org/ns/oa#hasTarget";
pub const OA_BODY_VALUE: &str = "http://www.w3.org/ns/oa#bodyValue";

pub const META_MAIN_TASK: &str = "http://w3id.org/prohow/meta#MainTask";
pub const META_METHOD: &str = "http://w3id.org/prohow/meta#Method";
pub const META_STEP: &str = "http://w3id.org/prohow/meta#Step";
pub const META_REQUIREMENT: &str = "http://w3id.org/prohow/meta#Requirement";
pub const META_SOURCE_DOC: &str = "http://w3id.org/prohow/meta#source_doc";
pub const META_CATEGORY: &str = "http://w3id.org/prohow/meta#category";
pub const META_DETAIL: &str = "http://w3id.org/prohow/meta#detail";
pub const META_SELECTOR_PATH: &str = "http://w3id.org/prohow/meta#selector_path";
pub const META_CHAR_START: &str = "http://w3id.org/prohow/meta#char_start";
pub const META_CHAR_END: &str = "http://w3id.org/prohow/meta#char_end";
pub const META_ORIGIN: &str = "http://w3id.org/prohow/meta#origin";

pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

/// Namespace for reified-statement nodes marking machine-generated triples.
pub const STATEMENT_NS: &str = "http://w3id.org/prohow/data/statement#";

/// Suffix appended to an entity URI to name its provenance annotation node.
/// Minted fragments percent-encode `~`, so the suffix cannot collide with an
/// entity URI.
pub const ANNOTATION_SUFFIX: &str = "~annotation";

/// Prefix table emitted at the top of Turtle output, in this order.
pub const TURTLE_PREFIXES: &[(&str, &str)] = &[
    ("prohow", PROHOW_NS),
    ("meta", META_NS),
    ("oa", OA_NS),
    ("rdf", RDF_NS),
    ("rdfs", RDFS_NS),
    ("xsd", XSD_NS),
];
