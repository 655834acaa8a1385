//! Fixed-schema feature vectors computed over (complex, primitive) candidate
//! pairs. The schema is named and versioned so a trained model can refuse
//! vectors it was not trained on.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{KnowHowGraph, ProcessEntity};
use crate::util::text::normalize_label;

use super::index::{indexed_text, InvertedIndex};
use super::tokenize::Tokenizer;
use super::{CandidatePair, DecomposeError};

pub const DEFAULT_SCHEMA_NAME: &str = "prohow-pair-features";
pub const DEFAULT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub version: u32,
    pub features: Vec<String>,
}

impl FeatureSchema {
    /// The 12-feature default schema.
    pub fn default_v1() -> Self {
        FeatureSchema {
            name: DEFAULT_SCHEMA_NAME.to_string(),
            version: DEFAULT_SCHEMA_VERSION,
            features: [
                "shared_label_idf_sum",
                "shared_label_idf_max",
                "shared_label_term_ratio",
                "label_jaccard",
                "shared_category_count",
                "category_jaccard",
                "shared_context_count",
                "context_jaccard",
                "label_length_ratio",
                "retrieval_score",
                "exact_label_match",
                "same_source_repository",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(
            values.iter().all(|v| v.is_finite()),
            "feature values must be finite"
        );
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Terms appearing in the descriptions of the other entities of the same
/// document, minus the entity's own terms.
pub fn context_of(
    graph: &KnowHowGraph,
    entity: &ProcessEntity,
    tokenizer: &Tokenizer,
) -> BTreeSet<String> {
    let own: BTreeSet<String> = tokenizer.token_set(&indexed_text(entity));
    let mut context = BTreeSet::new();
    for sibling in graph.entities() {
        if sibling.source_doc != entity.source_doc || sibling.uri == entity.uri {
            continue;
        }
        context.extend(tokenizer.token_set(&indexed_text(sibling)));
    }
    context.difference(&own).cloned().collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn repository(doc_id: &str) -> &str {
    doc_id.split('/').next().unwrap_or(doc_id)
}

/// Compute the default schema's vector for a candidate pair.
pub fn extract_features(
    graph: &KnowHowGraph,
    index: &InvertedIndex,
    pair: &CandidatePair,
    schema: &FeatureSchema,
    tokenizer: &Tokenizer,
) -> Result<FeatureVector, DecomposeError> {
    if schema.name != DEFAULT_SCHEMA_NAME || schema.version != DEFAULT_SCHEMA_VERSION {
        return Err(DecomposeError::UnknownSchema {
            name: schema.name.clone(),
            version: schema.version,
        });
    }
    let complex = graph
        .entity(&pair.complex)
        .ok_or_else(|| DecomposeError::InvalidPair {
            reason: format!("complex entity <{}> not in graph", pair.complex),
        })?;
    let primitive = graph
        .entity(&pair.primitive)
        .ok_or_else(|| DecomposeError::InvalidPair {
            reason: format!("primitive entity <{}> not in graph", pair.primitive),
        })?;

    let complex_terms = tokenizer.token_set(&complex.label);
    let primitive_terms = tokenizer.token_set(&primitive.label);
    let shared: Vec<&String> = complex_terms.intersection(&primitive_terms).collect();

    let mut idf_sum = 0.0;
    let mut idf_max = 0.0f64;
    if index.doc_count() > 0 {
        for term in &shared {
            let weight = index.idf(term);
            idf_sum += weight;
            idf_max = idf_max.max(weight);
        }
    }

    let term_ratio = if complex_terms.is_empty() {
        0.0
    } else {
        shared.len() as f64 / complex_terms.len() as f64
    };

    let complex_context = context_of(graph, complex, tokenizer);
    let primitive_context = context_of(graph, primitive, tokenizer);

    let length_ratio = {
        let (a, b) = (complex_terms.len(), primitive_terms.len());
        let max = a.max(b);
        if max == 0 {
            0.0
        } else {
            a.min(b) as f64 / max as f64
        }
    };

    let values = vec![
        idf_sum,
        idf_max,
        term_ratio,
        jaccard(&complex_terms, &primitive_terms),
        complex
            .categories
            .intersection(&primitive.categories)
            .count() as f64,
        {
            let union = complex.categories.union(&primitive.categories).count();
            if union == 0 {
                0.0
            } else {
                complex
                    .categories
                    .intersection(&primitive.categories)
                    .count() as f64
                    / union as f64
            }
        },
        complex_context.intersection(&primitive_context).count() as f64,
        jaccard(&complex_context, &primitive_context),
        length_ratio,
        pair.retrieval_score,
        f64::from(normalize_label(&complex.label) == normalize_label(&primitive.label)),
        f64::from(repository(&complex.source_doc) == repository(&primitive.source_doc)),
    ];
    debug_assert_eq!(values.len(), schema.len());
    Ok(FeatureVector::new(values))
}
