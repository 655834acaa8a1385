//! Mapping between [`KnowHowGraph`] and flat RDF triples, shared by the
//! N-Triples and Turtle codecs.
//!
//! Serialization is canonical: triples are emitted in lexicographic
//! (subject, predicate, object) order of their N-Triples rendering, so two
//! runs over the same graph produce byte-identical output. Machine-generated
//! relations are marked with a standard reification record so their origin
//! survives round trips.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::model::{
    Annotation, EntityKind, KnowHowGraph, Origin, ProcessEntity, Property, RawTriple, RdfNode,
    Relation, Selector,
};
use super::uri::EntityUri;
use super::vocab;
use crate::util::text::fnv1a64;

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("integrity error: {message}")]
    Integrity { message: String },
    #[error("input is not valid UTF-8")]
    Encoding,
}

impl RdfError {
    pub(crate) fn integrity(message: impl Into<String>) -> Self {
        RdfError::Integrity {
            message: message.into(),
        }
    }
}

/// Render one node in N-Triples syntax. Also the canonical sort key.
pub(crate) fn render_node(node: &RdfNode) -> String {
    match node {
        RdfNode::Iri(iri) => format!("<{iri}>"),
        RdfNode::Blank(label) => format!("_:{label}"),
        RdfNode::Literal {
            value,
            datatype,
            language,
        } => {
            let mut out = String::with_capacity(value.len() + 2);
            out.push('"');
            for ch in value.chars() {
                match ch {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    c if (c as u32) < 0x20 => {
                        out.push_str(&format!("\\u{:04X}", c as u32));
                    }
                    c => out.push(c),
                }
            }
            out.push('"');
            if let Some(lang) = language {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = datatype {
                out.push_str("^^<");
                out.push_str(dt);
                out.push('>');
            }
            out
        }
    }
}

fn sort_key(t: &RawTriple) -> (String, String, String) {
    (
        render_node(&t.subject),
        t.predicate.clone(),
        render_node(&t.object),
    )
}

/// Deterministic URI for the reification node marking a machine-linked triple.
fn statement_uri(rel_subject: &EntityUri, property: Property, rel_object: &EntityUri) -> String {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(rel_subject.as_str().as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(property.iri().as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(rel_object.as_str().as_bytes());
    format!("{}{:016x}", vocab::STATEMENT_NS, fnv1a64(&bytes))
}

/// Flatten a graph into its full sorted triple list.
pub(crate) fn graph_to_triples(graph: &KnowHowGraph) -> Vec<RawTriple> {
    debug_assert!(graph.check_integrity().is_ok());
    let mut triples: BTreeSet<RawTriple> = BTreeSet::new();
    let mut push = |s: RdfNode, p: &str, o: RdfNode| {
        triples.insert(RawTriple {
            subject: s,
            predicate: p.to_string(),
            object: o,
        });
    };

    for entity in graph.entities() {
        let subj = RdfNode::iri(entity.uri.as_str());
        push(
            subj.clone(),
            vocab::RDF_TYPE,
            RdfNode::iri(entity.kind.class_iri()),
        );
        push(
            subj.clone(),
            vocab::RDFS_LABEL,
            RdfNode::literal(entity.label.clone()),
        );
        push(
            subj.clone(),
            vocab::META_SOURCE_DOC,
            RdfNode::literal(entity.source_doc.clone()),
        );
        if let Some(detail) = &entity.detail {
            push(
                subj.clone(),
                vocab::META_DETAIL,
                RdfNode::literal(detail.clone()),
            );
        }
        for category in &entity.categories {
            push(
                subj.clone(),
                vocab::META_CATEGORY,
                RdfNode::literal(category.clone()),
            );
        }
    }

    for rel in graph.relations() {
        push(
            RdfNode::iri(rel.subject.as_str()),
            rel.property.iri(),
            RdfNode::iri(rel.object.as_str()),
        );
        if rel.origin == Origin::MachineLinked {
            let stmt = RdfNode::iri(statement_uri(&rel.subject, rel.property, &rel.object));
            push(
                stmt.clone(),
                vocab::RDF_TYPE,
                RdfNode::iri(vocab::RDF_STATEMENT),
            );
            push(
                stmt.clone(),
                vocab::RDF_SUBJECT,
                RdfNode::iri(rel.subject.as_str()),
            );
            push(
                stmt.clone(),
                vocab::RDF_PREDICATE,
                RdfNode::iri(rel.property.iri()),
            );
            push(
                stmt.clone(),
                vocab::RDF_OBJECT,
                RdfNode::iri(rel.object.as_str()),
            );
            push(stmt, vocab::META_ORIGIN, RdfNode::literal("machine"));
        }
    }

    for annotation in graph.annotations() {
        let node = RdfNode::iri(annotation.target.annotation_uri().as_str());
        push(
            node.clone(),
            vocab::RDF_TYPE,
            RdfNode::iri(vocab::OA_ANNOTATION),
        );
        push(
            node.clone(),
            vocab::OA_HAS_TARGET,
            RdfNode::iri(annotation.target.as_str()),
        );
        push(
            node.clone(),
            vocab::OA_BODY_VALUE,
            RdfNode::literal(annotation.body_text.clone()),
        );
        push(
            node.clone(),
            vocab::META_SOURCE_DOC,
            RdfNode::literal(annotation.selector.source_doc.clone()),
        );
        push(
            node.clone(),
            vocab::META_SELECTOR_PATH,
            RdfNode::literal(annotation.selector.path.clone()),
        );
        push(
            node.clone(),
            vocab::META_CHAR_START,
            RdfNode::typed_literal(
                annotation.selector.char_start.to_string(),
                vocab::XSD_INTEGER,
            ),
        );
        push(
            node,
            vocab::META_CHAR_END,
            RdfNode::typed_literal(annotation.selector.char_end.to_string(), vocab::XSD_INTEGER),
        );
    }

    for extra in graph.extra_triples() {
        triples.insert(extra.clone());
    }

    let mut out: Vec<RawTriple> = triples.into_iter().collect();
    out.sort_by_key(sort_key);
    out
}

fn literal_value(node: &RdfNode) -> Option<&str> {
    match node {
        RdfNode::Literal { value, .. } => Some(value),
        _ => None,
    }
}

fn iri_value(node: &RdfNode) -> Option<&str> {
    match node {
        RdfNode::Iri(iri) => Some(iri),
        _ => None,
    }
}

#[derive(Default)]
struct AnnotationParts {
    target: Option<String>,
    body: Option<String>,
    source_doc: Option<String>,
    path: Option<String>,
    char_start: Option<usize>,
    char_end: Option<usize>,
}

#[derive(Default)]
struct StatementParts {
    subject: Option<String>,
    predicate: Option<String>,
    object: Option<String>,
    origin: Option<String>,
}

/// Rebuild a graph from parsed triples. Triples are first brought into
/// canonical order so the result does not depend on statement order in the
/// input stream. Triples outside the recognized vocabulary are preserved in
/// the graph's side list.
pub(crate) fn triples_to_graph(mut triples: Vec<RawTriple>) -> Result<KnowHowGraph, RdfError> {
    triples.sort_by_key(sort_key);
    triples.dedup();

    let mut kinds: BTreeMap<String, EntityKind> = BTreeMap::new();
    let mut annotation_nodes: BTreeSet<String> = BTreeSet::new();
    let mut statement_nodes: BTreeSet<String> = BTreeSet::new();

    for t in &triples {
        if t.predicate != vocab::RDF_TYPE {
            continue;
        }
        let (Some(subject), Some(object)) = (iri_value(&t.subject), iri_value(&t.object)) else {
            continue;
        };
        if let Some(kind) = EntityKind::from_class_iri(object) {
            kinds.entry(subject.to_string()).or_insert(kind);
        } else if object == vocab::OA_ANNOTATION {
            annotation_nodes.insert(subject.to_string());
        } else if object == vocab::RDF_STATEMENT {
            statement_nodes.insert(subject.to_string());
        }
    }

    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    let mut source_docs: BTreeMap<String, String> = BTreeMap::new();
    let mut details: BTreeMap<String, String> = BTreeMap::new();
    let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut annotations: BTreeMap<String, AnnotationParts> = BTreeMap::new();
    let mut statements: BTreeMap<String, StatementParts> = BTreeMap::new();
    let mut core_triples: Vec<(String, Property, String)> = Vec::new();
    let mut extra: Vec<RawTriple> = Vec::new();

    for t in triples {
        let subject_iri = iri_value(&t.subject).map(str::to_string);
        let is_entity = subject_iri
            .as_deref()
            .is_some_and(|s| kinds.contains_key(s));
        let is_annotation = subject_iri
            .as_deref()
            .is_some_and(|s| annotation_nodes.contains(s));
        let is_statement = subject_iri
            .as_deref()
            .is_some_and(|s| statement_nodes.contains(s));

        if t.predicate == vocab::RDF_TYPE {
            if let Some(object) = iri_value(&t.object) {
                if EntityKind::from_class_iri(object).is_some()
                    || object == vocab::OA_ANNOTATION
                    || object == vocab::RDF_STATEMENT
                {
                    continue; // consumed in the first pass
                }
            }
            extra.push(t);
            continue;
        }

        if let Some(property) = Property::from_iri(&t.predicate) {
            let subject = subject_iri.clone().ok_or_else(|| {
                RdfError::integrity(format!("{} triple with non-IRI subject", t.predicate))
            })?;
            let object = iri_value(&t.object)
                .ok_or_else(|| {
                    RdfError::integrity(format!("{} triple with non-IRI object", t.predicate))
                })?
                .to_string();
            core_triples.push((subject, property, object));
            continue;
        }

        let consumed = match t.predicate.as_str() {
            vocab::RDFS_LABEL if is_entity => {
                insert_first(&mut labels, &subject_iri, literal_value(&t.object))
            }
            vocab::META_SOURCE_DOC if is_entity => {
                insert_first(&mut source_docs, &subject_iri, literal_value(&t.object))
            }
            vocab::META_DETAIL if is_entity => {
                insert_first(&mut details, &subject_iri, literal_value(&t.object))
            }
            vocab::META_CATEGORY if is_entity => match literal_value(&t.object) {
                Some(value) => {
                    categories
                        .entry(subject_iri.clone().expect("entity subject"))
                        .or_default()
                        .insert(value.to_string());
                    true
                }
                None => false,
            },
            vocab::OA_HAS_TARGET if is_annotation => {
                let parts = annotations
                    .entry(subject_iri.clone().expect("anno subject"))
                    .or_default();
                match (parts.target.is_none(), iri_value(&t.object)) {
                    (true, Some(target)) => {
                        parts.target = Some(target.to_string());
                        true
                    }
                    _ => false,
                }
            }
            vocab::OA_BODY_VALUE if is_annotation => {
                annotation_field(&mut annotations, &subject_iri, &t.object, |p| &mut p.body)
            }
            vocab::META_SOURCE_DOC if is_annotation => {
                annotation_field(&mut annotations, &subject_iri, &t.object, |p| {
                    &mut p.source_doc
                })
            }
            vocab::META_SELECTOR_PATH if is_annotation => {
                annotation_field(&mut annotations, &subject_iri, &t.object, |p| &mut p.path)
            }
            vocab::META_CHAR_START if is_annotation => {
                annotation_offset(&mut annotations, &subject_iri, &t.object, |p| {
                    &mut p.char_start
                })?
            }
            vocab::META_CHAR_END if is_annotation => {
                annotation_offset(&mut annotations, &subject_iri, &t.object, |p| {
                    &mut p.char_end
                })?
            }
            vocab::RDF_SUBJECT if is_statement => {
                statement_field(&mut statements, &subject_iri, &t.object, |p| &mut p.subject)
            }
            vocab::RDF_PREDICATE if is_statement => {
                statement_field(&mut statements, &subject_iri, &t.object, |p| {
                    &mut p.predicate
                })
            }
            vocab::RDF_OBJECT if is_statement => {
                statement_field(&mut statements, &subject_iri, &t.object, |p| &mut p.object)
            }
            vocab::META_ORIGIN if is_statement => {
                let parts = statements
                    .entry(subject_iri.clone().expect("stmt subject"))
                    .or_default();
                match (parts.origin.is_none(), literal_value(&t.object)) {
                    (true, Some(value)) => {
                        parts.origin = Some(value.to_string());
                        true
                    }
                    _ => false,
                }
            }
            _ => false,
        };
        if !consumed {
            extra.push(t);
        }
    }

    let mut graph = KnowHowGraph::new();
    for (uri, kind) in &kinds {
        let label = labels
            .get(uri)
            .ok_or_else(|| RdfError::integrity(format!("entity <{uri}> has no label")))?;
        let source_doc = source_docs
            .get(uri)
            .ok_or_else(|| RdfError::integrity(format!("entity <{uri}> has no source document")))?;
        let entity = ProcessEntity {
            uri: EntityUri::parse(uri.clone()).map_err(|e| RdfError::integrity(e.to_string()))?,
            label: label.clone(),
            kind: *kind,
            source_doc: source_doc.clone(),
            categories: categories.remove(uri).unwrap_or_default(),
            detail: details.get(uri).cloned(),
        };
        graph
            .add_entity(entity)
            .map_err(|e| RdfError::integrity(e.to_string()))?;
    }

    let mut machine_marked: BTreeSet<(String, Property, String)> = BTreeSet::new();
    for (node, parts) in &statements {
        let (Some(s), Some(p), Some(o)) = (&parts.subject, &parts.predicate, &parts.object) else {
            return Err(RdfError::integrity(format!(
                "incomplete statement node <{node}>"
            )));
        };
        let property = Property::from_iri(p).ok_or_else(|| {
            RdfError::integrity(format!(
                "statement <{node}> reifies non-core property <{p}>"
            ))
        })?;
        machine_marked.insert((s.clone(), property, o.clone()));
    }

    let mut seen_core: BTreeSet<(String, Property, String)> = BTreeSet::new();
    for (s, property, o) in core_triples {
        let origin = if machine_marked.contains(&(s.clone(), property, o.clone())) {
            Origin::MachineLinked
        } else {
            Origin::Extracted
        };
        seen_core.insert((s.clone(), property, o.clone()));
        let relation = Relation {
            subject: EntityUri::parse(s).map_err(|e| RdfError::integrity(e.to_string()))?,
            property,
            object: EntityUri::parse(o).map_err(|e| RdfError::integrity(e.to_string()))?,
            origin,
        };
        graph
            .add_relation(relation)
            .map_err(|e| RdfError::integrity(e.to_string()))?;
    }
    for (s, p, o) in &machine_marked {
        if !seen_core.contains(&(s.clone(), *p, o.clone())) {
            return Err(RdfError::integrity(format!(
                "statement marks missing triple <{s}> {} <{o}>",
                p.iri()
            )));
        }
    }

    for (node, parts) in annotations {
        let target = parts
            .target
            .ok_or_else(|| RdfError::integrity(format!("annotation <{node}> has no target")))?;
        let annotation = Annotation {
            target: EntityUri::parse(target).map_err(|e| RdfError::integrity(e.to_string()))?,
            body_text: parts.body.unwrap_or_default(),
            selector: Selector {
                source_doc: parts.source_doc.unwrap_or_default(),
                path: parts.path.unwrap_or_default(),
                char_start: parts.char_start.unwrap_or(0),
                char_end: parts.char_end.unwrap_or(0),
            },
        };
        graph
            .add_annotation(annotation)
            .map_err(|e| RdfError::integrity(e.to_string()))?;
    }

    for t in extra {
        graph.add_extra_triple(t);
    }
    Ok(graph)
}

fn insert_first(
    map: &mut BTreeMap<String, String>,
    subject: &Option<String>,
    value: Option<&str>,
) -> bool {
    let subject = subject.clone().expect("checked IRI subject");
    match (map.contains_key(&subject), value) {
        (false, Some(v)) => {
            map.insert(subject, v.to_string());
            true
        }
        _ => false,
    }
}

fn annotation_field(
    map: &mut BTreeMap<String, AnnotationParts>,
    subject: &Option<String>,
    object: &RdfNode,
    field: impl Fn(&mut AnnotationParts) -> &mut Option<String>,
) -> bool {
    let parts = map
        .entry(subject.clone().expect("anno subject"))
        .or_default();
    let slot = field(parts);
    match (slot.is_none(), literal_value(object)) {
        (true, Some(value)) => {
            *slot = Some(value.to_string());
            true
        }
        _ => false,
    }
}

fn annotation_offset(
    map: &mut BTreeMap<String, AnnotationParts>,
    subject: &Option<String>,
    object: &RdfNode,
    field: impl Fn(&mut AnnotationParts) -> &mut Option<usize>,
) -> Result<bool, RdfError> {
    let parts = map
        .entry(subject.clone().expect("anno subject"))
        .or_default();
    let slot = field(parts);
    if slot.is_some() {
        return Ok(false);
    }
    match literal_value(object) {
        Some(value) => {
            let parsed: usize = value.parse().map_err(|_| {
                RdfError::integrity(format!("annotation offset {value:?} is not an integer"))
            })?;
            *slot = Some(parsed);
            Ok(true)
        }
        None => Ok(false),
    }
}

fn statement_field(
    map: &mut BTreeMap<String, StatementParts>,
    subject: &Option<String>,
    object: &RdfNode,
    field: impl Fn(&mut StatementParts) -> &mut Option<String>,
) -> bool {
    let parts = map
        .entry(subject.clone().expect("stmt subject"))
        .or_default();
    let slot = field(parts);
    match (slot.is_none(), iri_value(object)) {
        (true, Some(value)) => {
            *slot = Some(value.to_string());
            true
        }
        _ => false,
    }
}
