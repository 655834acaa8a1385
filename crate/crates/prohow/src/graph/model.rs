//! The process graph: entities, the three core relations, and provenance
//! annotations.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::uri::EntityUri;
use super::{vocab, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    MainTask,
    Method,
    Step,
    Requirement,
}

impl EntityKind {
    pub fn class_iri(self) -> &'static str {
        match self {
            EntityKind::MainTask => vocab::META_MAIN_TASK,
            EntityKind::Method => vocab::META_METHOD,
            EntityKind::Step => vocab::META_STEP,
            EntityKind::Requirement => vocab::META_REQUIREMENT,
        }
    }

    pub fn from_class_iri(iri: &str) -> Option<Self> {
        match iri {
            vocab::META_MAIN_TASK => Some(EntityKind::MainTask),
            vocab::META_METHOD => Some(EntityKind::Method),
            vocab::META_STEP => Some(EntityKind::Step),
            vocab::META_REQUIREMENT => Some(EntityKind::Requirement),
            _ => None,
        }
    }
}

/// The three core properties. Everything else in a serialized graph is
/// entity metadata or annotation structure, never a process relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    HasStep,
    HasMethod,
    Requires,
}

impl Property {
    pub const ALL: [Property; 3] = [Property::HasStep, Property::HasMethod, Property::Requires];

    pub fn iri(self) -> &'static str {
        match self {
            Property::HasStep => vocab::HAS_STEP,
            Property::HasMethod => vocab::HAS_METHOD,
            Property::Requires => vocab::REQUIRES,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri {
            vocab::HAS_STEP => Some(Property::HasStep),
            vocab::HAS_METHOD => Some(Property::HasMethod),
            vocab::REQUIRES => Some(Property::Requires),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::HasStep => "has_step",
            Property::HasMethod => "has_method",
            Property::Requires => "requires",
        }
    }
}

/// Whether a relation came out of document structure or was added by the
/// link classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    Extracted,
    MachineLinked,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProcessEntity {
    pub uri: EntityUri,
    pub label: String,
    pub kind: EntityKind,
    pub source_doc: String,
    pub categories: BTreeSet<String>,
    /// Longer description attached to some steps; indexed together with the
    /// label but not part of it.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub subject: EntityUri,
    pub property: Property,
    pub object: EntityUri,
    pub origin: Origin,
}

/// Where in the source document an entity's text came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Selector {
    pub source_doc: String,
    /// Structural path within the document, slash-separated.
    pub path: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Provenance record tying an entity to its human-readable source text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub target: EntityUri,
    /// The source text before whitespace normalization.
    pub body_text: String,
    pub selector: Selector,
}

/// RDF node as found in a parsed stream. Only the side list of foreign
/// triples ever holds blank nodes or literals in subject-independent form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RdfNode {
    Iri(String),
    Blank(String),
    Literal {
        value: String,
        datatype: Option<String>,
        language: Option<String>,
    },
}

impl RdfNode {
    pub fn iri(value: impl Into<String>) -> Self {
        RdfNode::Iri(value.into())
    }

    pub fn literal(value: impl Into<String>) -> Self {
        RdfNode::Literal {
            value: value.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed_literal(value: impl Into<String>, datatype: impl Into<String>) -> Self {
        RdfNode::Literal {
            value: value.into(),
            datatype: Some(datatype.into()),
            language: None,
        }
    }
}

/// A triple outside the core vocabulary, preserved verbatim across
/// parse/serialize round trips.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawTriple {
    pub subject: RdfNode,
    pub predicate: String,
    pub object: RdfNode,
}

/// Wildcard pattern over (subject, property, object).
#[derive(Debug, Clone, Default)]
pub struct TriplePattern<'a> {
    pub subject: Option<&'a EntityUri>,
    pub property: Option<Property>,
    pub object: Option<&'a EntityUri>,
}

/// Triple store over the three core properties plus per-entity annotations.
///
/// Construction is single-writer; a finished graph is immutable and can be
/// shared freely across readers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowHowGraph {
    entities: BTreeMap<EntityUri, ProcessEntity>,
    relations: BTreeMap<(EntityUri, Property, EntityUri), Origin>,
    annotations: BTreeMap<EntityUri, Annotation>,
    /// Foreign triples kept from parsed input, never interpreted.
    extra: BTreeSet<RawTriple>,
}

impl KnowHowGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn annotation_count(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty() && self.extra.is_empty()
    }

    pub fn contains(&self, uri: &EntityUri) -> bool {
        self.entities.contains_key(uri)
    }

    pub fn entity(&self, uri: &EntityUri) -> Option<&ProcessEntity> {
        self.entities.get(uri)
    }

    pub fn entities(&self) -> impl Iterator<Item = &ProcessEntity> {
        self.entities.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = Relation> + '_ {
        self.relations.iter().map(|((s, p, o), origin)| Relation {
            subject: s.clone(),
            property: *p,
            object: o.clone(),
            origin: *origin,
        })
    }

    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.values()
    }

    pub fn annotation_of(&self, uri: &EntityUri) -> Option<&Annotation> {
        self.annotations.get(uri)
    }

    pub fn extra_triples(&self) -> impl Iterator<Item = &RawTriple> {
        self.extra.iter()
    }

    pub fn add_entity(&mut self, entity: ProcessEntity) -> Result<(), GraphError> {
        if entity.label.trim().is_empty() {
            return Err(GraphError::EmptyLabel {
                uri: entity.uri.to_string(),
            });
        }
        if self.entities.contains_key(&entity.uri) {
            return Err(GraphError::DuplicateEntity {
                uri: entity.uri.to_string(),
            });
        }
        self.entities.insert(entity.uri.clone(), entity);
        Ok(())
    }

    /// Insert a relation. Idempotent: re-adding an existing
    /// (subject, property, object) triple leaves the graph unchanged and
    /// returns `false`.
    pub fn add_relation(&mut self, rel: Relation) -> Result<bool, GraphError> {
        if rel.subject == rel.object {
            return Err(GraphError::SelfLoop {
                uri: rel.subject.to_string(),
            });
        }
        for endpoint in [&rel.subject, &rel.object] {
            if !self.entities.contains_key(endpoint) {
                return Err(GraphError::DanglingEndpoint {
                    uri: endpoint.to_string(),
                });
            }
        }
        let key = (rel.subject, rel.property, rel.object);
        if self.relations.contains_key(&key) {
            return Ok(false);
        }
        self.relations.insert(key, rel.origin);
        Ok(true)
    }

    /// Attach the provenance annotation for an entity. Each entity carries
    /// exactly one.
    pub fn add_annotation(&mut self, annotation: Annotation) -> Result<(), GraphError> {
        if !self.entities.contains_key(&annotation.target) {
            return Err(GraphError::DanglingEndpoint {
                uri: annotation.target.to_string(),
            });
        }
        if self.annotations.contains_key(&annotation.target) {
            return Err(GraphError::DuplicateAnnotation {
                uri: annotation.target.to_string(),
            });
        }
        self.annotations
            .insert(annotation.target.clone(), annotation);
        Ok(())
    }

    pub fn add_extra_triple(&mut self, triple: RawTriple) {
        self.extra.insert(triple);
    }

    /// All relations matching the pattern; wildcard on any position.
    pub fn query(&self, pattern: &TriplePattern<'_>) -> Vec<Relation> {
        self.relations()
            .filter(|rel| {
                pattern.subject.is_none_or(|s| s == &rel.subject)
                    && pattern.property.is_none_or(|p| p == rel.property)
                    && pattern.object.is_none_or(|o| o == &rel.object)
            })
            .collect()
    }

    fn objects_of(&self, subject: &EntityUri, property: Property) -> Vec<&ProcessEntity> {
        let pattern = TriplePattern {
            subject: Some(subject),
            property: Some(property),
            object: None,
        };
        self.query(&pattern)
            .into_iter()
            .filter_map(|rel| self.entities.get(&rel.object))
            .collect()
    }

    /// Steps of a process. For a process decomposed through method
    /// alternatives this includes each method's direct steps, so asking for
    /// the steps of a multi-method task returns all of them.
    pub fn steps_of(&self, subject: &EntityUri) -> Vec<&ProcessEntity> {
        let mut out = self.objects_of(subject, Property::HasStep);
        for method in self.objects_of(subject, Property::HasMethod) {
            out.extend(self.objects_of(&method.uri, Property::HasStep));
        }
        out.sort_by(|a, b| a.uri.cmp(&b.uri));
        out.dedup_by(|a, b| a.uri == b.uri);
        out
    }

    pub fn methods_of(&self, subject: &EntityUri) -> Vec<&ProcessEntity> {
        self.objects_of(subject, Property::HasMethod)
    }

    /// Requirement entities of a process (objects of `requires` that carry
    /// the Requirement kind; ordering dependencies between steps are not
    /// requirements).
    pub fn requirements_of(&self, subject: &EntityUri) -> Vec<&ProcessEntity> {
        self.objects_of(subject, Property::Requires)
            .into_iter()
            .filter(|e| e.kind == EntityKind::Requirement)
            .collect()
    }

    /// Entities with kind MainTask, in URI order.
    pub fn top_level(&self) -> Vec<&ProcessEntity> {
        self.entities
            .values()
            .filter(|e| e.kind == EntityKind::MainTask)
            .collect()
    }

    /// True iff the entity has no outgoing `has_step` or `has_method`
    /// relation, i.e. it cannot be decomposed further.
    pub fn is_primitive(&self, uri: &EntityUri) -> Result<bool, GraphError> {
        if !self.entities.contains_key(uri) {
            return Err(GraphError::UnknownEntity {
                uri: uri.to_string(),
            });
        }
        let decomposed = self
            .relations
            .range((uri.clone(), Property::HasStep, EntityUri::min_bound())..)
            .take_while(|((s, _, _), _)| s == uri)
            .any(|((_, p, _), _)| matches!(p, Property::HasStep | Property::HasMethod));
        Ok(!decomposed)
    }

    /// Every relation endpoint and annotation target resolves to an entity.
    pub fn check_integrity(&self) -> Result<(), GraphError> {
        for (s, _, o) in self.relations.keys() {
            for endpoint in [s, o] {
                if !self.entities.contains_key(endpoint) {
                    return Err(GraphError::DanglingEndpoint {
                        uri: endpoint.to_string(),
                    });
                }
            }
        }
        for target in self.annotations.keys() {
            if !self.entities.contains_key(target) {
                return Err(GraphError::DanglingEndpoint {
                    uri: target.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Union with another graph. Entity sets must be disjoint.
    pub fn merge(&mut self, other: KnowHowGraph) -> Result<(), GraphError> {
        for entity in other.entities.into_values() {
            self.add_entity(entity)?;
        }
        for ((s, p, o), origin) in other.relations {
            self.add_relation(Relation {
                subject: s,
                property: p,
                object: o,
                origin,
            })?;
        }
        for annotation in other.annotations.into_values() {
            self.add_annotation(annotation)?;
        }
        for triple in other.extra {
            self.extra.insert(triple);
        }
        Ok(())
    }
}
