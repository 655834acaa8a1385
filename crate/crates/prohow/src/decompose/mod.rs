//! Decomposition link discovery: index the primitive entities, retrieve
//! candidate primitives for each complex process, and keep the candidates a
//! trained classifier accepts.

pub mod features;
pub mod forest;
pub mod index;
pub mod tokenize;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{EntityUri, KnowHowGraph, Origin, Property, Relation};

pub use features::{context_of, extract_features, FeatureSchema, FeatureVector};
pub use forest::{
    cross_validate, train_forest, CvMetrics, FoldMetrics, ForestHyperparams, ForestModel,
    TrainingSample,
};
pub use index::{build_index, indexed_text, InvertedIndex, INDEX_FORMAT_VERSION};
pub use tokenize::Tokenizer;

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("io error: {message}")]
    Io { message: String },
    #[error("index format error: {message}")]
    IndexFormat { message: String },
    #[error("model format error: {message}")]
    ModelFormat { message: String },
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("invalid hyperparameters: {reason}")]
    InvalidHyperparams { reason: String },
    #[error("feature vector length {got} does not match schema length {expected}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("unknown feature schema {name:?} v{version}")]
    UnknownSchema { name: String, version: u32 },
    #[error("model has no trees")]
    EmptyModel,
    #[error("{have} examples cannot fill {folds} folds")]
    TooFewExamples { have: usize, folds: usize },
    #[error("invalid candidate pair: {reason}")]
    InvalidPair { reason: String },
}

/// A retrieved (complex process, primitive entity) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub complex: EntityUri,
    pub primitive: EntityUri,
    pub retrieval_score: f64,
}

/// A candidate pair with a human judgment, as read from the labeled-pairs
/// file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub complex: EntityUri,
    pub primitive: EntityUri,
    pub label: bool,
}

/// An accepted decomposition link: the complex process elaborates the
/// primitive step.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionLink {
    pub primitive: EntityUri,
    pub complex: EntityUri,
    pub score: f64,
}

/// Classify the top-k candidates of every top-level process and keep the
/// positives. Deterministic: processes in URI order, candidates in retrieval
/// order.
pub fn generate_links(
    graph: &KnowHowGraph,
    index: &InvertedIndex,
    model: &ForestModel,
    tokenizer: &Tokenizer,
    k: usize,
    threshold: f64,
) -> Result<Vec<DecompositionLink>, DecomposeError> {
    if model.trees.is_empty() {
        return Err(DecomposeError::EmptyModel);
    }
    let mut links = Vec::new();
    for complex in graph.top_level() {
        if graph
            .is_primitive(&complex.uri)
            .expect("entity comes from this graph")
        {
            continue;
        }
        for pair in index.retrieve_candidates(complex, k, tokenizer) {
            let fv = extract_features(graph, index, &pair, &model.schema, tokenizer)?;
            let (accepted, score) = model.predict_with_threshold(&fv, threshold)?;
            if accepted {
                links.push(DecompositionLink {
                    primitive: pair.primitive,
                    complex: pair.complex,
                    score,
                });
            }
        }
    }
    links.sort_by(|a, b| (&a.primitive, &a.complex).cmp(&(&b.primitive, &b.complex)));
    Ok(links)
}

/// Add accepted links to the graph as machine-generated
/// `primitive has_method complex` relations. Returns how many relations were
/// newly inserted.
pub fn apply_links(
    graph: &mut KnowHowGraph,
    links: &[DecompositionLink],
) -> Result<usize, crate::graph::GraphError> {
    let mut added = 0;
    for link in links {
        let inserted = graph.add_relation(Relation {
            subject: link.primitive.clone(),
            property: Property::HasMethod,
            object: link.complex.clone(),
            origin: Origin::MachineLinked,
        })?;
        if inserted {
            added += 1;
        }
    }
    Ok(added)
}

/// Compute feature vectors for labeled pairs. The retrieval score feature is
/// recomputed from the index with the same formula retrieval uses.
pub fn featurize_labeled_pairs(
    graph: &KnowHowGraph,
    index: &InvertedIndex,
    pairs: &[LabeledPair],
    schema: &FeatureSchema,
    tokenizer: &Tokenizer,
) -> Result<Vec<TrainingSample>, DecomposeError> {
    let mut samples = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let complex = graph
            .entity(&pair.complex)
            .ok_or_else(|| DecomposeError::InvalidPair {
                reason: format!("complex entity <{}> not in graph", pair.complex),
            })?;
        let query_terms = tokenizer.token_set(&indexed_text(complex));
        let retrieval_score = index
            .pair_score(&query_terms, &pair.primitive)
            .ok_or_else(|| DecomposeError::InvalidPair {
                reason: format!("primitive entity <{}> not in index", pair.primitive),
            })?;
        let candidate = CandidatePair {
            complex: pair.complex.clone(),
            primitive: pair.primitive.clone(),
            retrieval_score,
        };
        let features = extract_features(graph, index, &candidate, schema, tokenizer)?;
        samples.push(TrainingSample {
            features,
            label: pair.label,
        });
    }
    Ok(samples)
}

/// Labeled-pairs file: `complex URI <TAB> primitive URI <TAB> 0|1`.
pub fn labeled_pairs_from_tsv(text: &str) -> Result<Vec<LabeledPair>, DecomposeError> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(DecomposeError::Io {
                message: format!("labeled pairs line {}: expected 3 fields", idx + 1),
            });
        }
        let label = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(DecomposeError::Io {
                    message: format!("labeled pairs line {}: bad label {other:?}", idx + 1),
                })
            }
        };
        pairs.push(LabeledPair {
            complex: EntityUri::parse(fields[0]).map_err(|e| DecomposeError::Io {
                message: e.to_string(),
            })?,
            primitive: EntityUri::parse(fields[1]).map_err(|e| DecomposeError::Io {
                message: e.to_string(),
            })?,
            label,
        });
    }
    Ok(pairs)
}

pub fn labeled_pairs_to_tsv(pairs: &[LabeledPair]) -> String {
    let mut out = String::new();
    for pair in pairs {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            pair.complex,
            pair.primitive,
            u8::from(pair.label)
        ));
    }
    out
}

/// Links file: `primitive URI <TAB> complex URI <TAB> score`.
pub fn links_to_tsv(links: &[DecompositionLink]) -> String {
    let mut out = String::new();
    for link in links {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            link.primitive, link.complex, link.score
        ));
    }
    out
}

pub fn links_from_tsv(text: &str) -> Result<Vec<DecompositionLink>, DecomposeError> {
    let mut links = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(DecomposeError::Io {
                message: format!("links line {}: expected 3 fields", idx + 1),
            });
        }
        links.push(DecompositionLink {
            primitive: EntityUri::parse(fields[0]).map_err(|e| DecomposeError::Io {
                message: e.to_string(),
            })?,
            complex: EntityUri::parse(fields[1]).map_err(|e| DecomposeError::Io {
                message: e.to_string(),
            })?,
            score: fields[2].parse().map_err(|e| DecomposeError::Io {
                message: format!("line {}: {e}", idx + 1),
            })?,
        });
    }
    Ok(links)
}

/// Group doc-id → entities once; used by callers that need many context or
/// coverage computations over the same graph.
pub fn entities_by_document(graph: &KnowHowGraph) -> BTreeMap<String, Vec<EntityUri>> {
    let mut map: BTreeMap<String, Vec<EntityUri>> = BTreeMap::new();
    for entity in graph.entities() {
        map.entry(entity.source_doc.clone())
            .or_default()
            .push(entity.uri.clone());
    }
    map
}
