//! Conversion of validated documents into graph fragments: one entity per
//! structural element, the three core relations, ordering dependencies, and
//! one provenance annotation per entity.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{
    mint_uri, Annotation, EntityKind, EntityUri, KnowHowGraph, Origin, ProcessEntity, Property,
    Relation, Selector,
};
use crate::ingest::{HowToDocument, StepBlock};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("duplicate document id {doc_id:?}")]
    DuplicateDocId { doc_id: String },
}

/// Per-document extraction statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    pub doc_id: String,
    pub entity_count: usize,
    pub relations_by_property: BTreeMap<Property, usize>,
    pub skipped: Option<String>,
}

impl ExtractionReport {
    pub fn skipped(doc_id: impl Into<String>, reason: impl Into<String>) -> Self {
        ExtractionReport {
            doc_id: doc_id.into(),
            entity_count: 0,
            relations_by_property: BTreeMap::new(),
            skipped: Some(reason.into()),
        }
    }

    pub fn relation_count(&self) -> usize {
        self.relations_by_property.values().sum()
    }

    pub fn count_of(&self, property: Property) -> usize {
        self.relations_by_property
            .get(&property)
            .copied()
            .unwrap_or(0)
    }
}

/// Corpus totals plus the per-document rows they were summed from.
#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub documents: Vec<ExtractionReport>,
}

impl CorpusReport {
    pub fn total_entities(&self) -> usize {
        self.documents.iter().map(|d| d.entity_count).sum()
    }

    pub fn total_of(&self, property: Property) -> usize {
        self.documents.iter().map(|d| d.count_of(property)).sum()
    }

    pub fn total_relations(&self) -> usize {
        self.documents.iter().map(|d| d.relation_count()).sum()
    }

    pub fn skipped_count(&self) -> usize {
        self.documents
            .iter()
            .filter(|d| d.skipped.is_some())
            .count()
    }
}

struct Extractor<'a> {
    base: &'a str,
    doc: &'a HowToDocument,
    graph: KnowHowGraph,
}

/// Extract one document into a graph fragment.
///
/// The document must be valid (`ingest::validate` returns no violations);
/// feeding an invalid document is a programmer error and panics.
pub fn extract(doc: &HowToDocument, base: &str) -> (KnowHowGraph, ExtractionReport) {
    let violations = crate::ingest::validate(doc);
    assert!(
        violations.is_empty(),
        "extract() requires a valid document, got: {}",
        violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    );

    let mut ex = Extractor {
        base,
        doc,
        graph: KnowHowGraph::new(),
    };

    let task_uri = ex.add_entity(
        "main",
        EntityKind::MainTask,
        doc.title.text.clone(),
        None,
        doc.title.raw.clone(),
        &Selector {
            source_doc: doc.doc_id.clone(),
            path: "main".to_string(),
            char_start: 0,
            char_end: doc.title.char_len(),
        },
    );

    for req in &doc.requirements {
        let req_uri = ex.add_entity(
            &req.selector.path,
            EntityKind::Requirement,
            req.text.text.clone(),
            None,
            req.text.raw.clone(),
            &req.selector,
        );
        ex.relate(&task_uri, Property::Requires, &req_uri);
    }

    let single_method = doc.methods.len() == 1;
    for (j, method) in doc.methods.iter().enumerate() {
        let step_parent = if single_method {
            task_uri.clone()
        } else {
            // An unnamed alternative inherits the task's label: it is the
            // same process, reached another way.
            let (label, raw) = match &method.name {
                Some(name) => (name.text.clone(), name.raw.clone()),
                None => (doc.title.text.clone(), doc.title.raw.clone()),
            };
            let method_uri = ex.add_entity(
                &format!("method{}", j + 1),
                EntityKind::Method,
                label,
                None,
                raw,
                &Selector {
                    source_doc: doc.doc_id.clone(),
                    path: format!("method{}", j + 1),
                    char_start: 0,
                    char_end: 0,
                },
            );
            ex.relate(&task_uri, Property::HasMethod, &method_uri);
            method_uri
        };
        ex.add_steps(&step_parent, &method.steps, method.ordered);
    }

    let report = ExtractionReport {
        doc_id: doc.doc_id.clone(),
        entity_count: ex.graph.entity_count(),
        relations_by_property: {
            let mut counts: BTreeMap<Property, usize> =
                Property::ALL.iter().map(|p| (*p, 0)).collect();
            for rel in ex.graph.relations() {
                *counts.entry(rel.property).or_insert(0) += 1;
            }
            counts
        },
        skipped: None,
    };
    (ex.graph, report)
}

impl<'a> Extractor<'a> {
    fn add_entity(
        &mut self,
        fragment_path: &str,
        kind: EntityKind,
        label: String,
        detail: Option<String>,
        body_text: String,
        selector: &Selector,
    ) -> EntityUri {
        let uri = mint_uri(self.base, &self.doc.doc_id, fragment_path)
            .expect("valid document ids and generated paths always mint");
        self.graph
            .add_entity(ProcessEntity {
                uri: uri.clone(),
                label,
                kind,
                source_doc: self.doc.doc_id.clone(),
                categories: self.doc.categories.iter().cloned().collect(),
                detail,
            })
            .expect("generated URIs are unique within a document");
        self.graph
            .add_annotation(Annotation {
                target: uri.clone(),
                body_text,
                selector: selector.clone(),
            })
            .expect("each entity is annotated exactly once");
        uri
    }

    fn relate(&mut self, subject: &EntityUri, property: Property, object: &EntityUri) {
        self.graph
            .add_relation(Relation {
                subject: subject.clone(),
                property,
                object: object.clone(),
                origin: Origin::Extracted,
            })
            .expect("extraction never emits dangling or reflexive relations");
    }

    fn add_steps(&mut self, parent: &EntityUri, steps: &[StepBlock], ordered: bool) {
        let mut previous: Option<EntityUri> = None;
        for step in steps {
            let uri = self.add_entity(
                &step.selector.path,
                EntityKind::Step,
                step.headline.text.clone(),
                step.detail.as_ref().map(|d| d.text.clone()),
                step.headline.raw.clone(),
                &step.selector,
            );
            self.relate(parent, Property::HasStep, &uri);
            if ordered {
                if let Some(prev) = &previous {
                    // The later step depends on the earlier one.
                    self.relate(&uri, Property::Requires, prev);
                }
            }
            previous = Some(uri.clone());
            self.add_steps(&uri, &step.substeps, ordered);
        }
    }
}

/// Union of per-document fragments. Deterministic regardless of input order;
/// duplicate document ids are an error.
pub fn extract_corpus(
    docs: &[HowToDocument],
    base: &str,
) -> Result<(KnowHowGraph, CorpusReport), ExtractError> {
    let mut sorted: Vec<&HowToDocument> = docs.iter().collect();
    sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for pair in sorted.windows(2) {
        if pair[0].doc_id == pair[1].doc_id {
            return Err(ExtractError::DuplicateDocId {
                doc_id: pair[0].doc_id.clone(),
            });
        }
    }

    let mut graph = KnowHowGraph::new();
    let mut report = CorpusReport::default();
    for doc in sorted {
        let (fragment, doc_report) = extract(doc, base);
        graph
            .merge(fragment)
            .expect("fragments of distinct documents are disjoint");
        report.documents.push(doc_report);
    }
    Ok((graph, report))
}

/// Render the corpus report as the delimited extraction-report table.
pub fn report_to_tsv(report: &CorpusReport) -> String {
    let mut out = String::from("doc_id\tentities\thas_step\thas_method\trequires\tskipped\n");
    for doc in &report.documents {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            doc.doc_id,
            doc.entity_count,
            doc.count_of(Property::HasStep),
            doc.count_of(Property::HasMethod),
            doc.count_of(Property::Requires),
            doc.skipped.as_deref().unwrap_or("-"),
        ));
    }
    out
}

/// Parse the table back; used by downstream stages and `stats`.
pub fn report_from_tsv(text: &str) -> Result<CorpusReport, String> {
    let mut documents = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(format!(
                "line {}: expected 6 fields, got {}",
                idx + 1,
                fields.len()
            ));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| format!("line {}: {e}", idx + 1))
        };
        let mut relations_by_property = BTreeMap::new();
        relations_by_property.insert(Property::HasStep, parse(fields[2])?);
        relations_by_property.insert(Property::HasMethod, parse(fields[3])?);
        relations_by_property.insert(Property::Requires, parse(fields[4])?);
        documents.push(ExtractionReport {
            doc_id: fields[0].to_string(),
            entity_count: parse(fields[1])?,
            relations_by_property,
            skipped: if fields[5] == "-" {
                None
            } else {
                Some(fields[5].to_string())
            },
        });
    }
    Ok(CorpusReport { documents })
}
