//! Input/output linking against an external entity catalog, and composition
//! of producer→consumer links between processes that share a catalog entity.
//!
//! Inputs are found among a process's requirements; outputs come from
//! top-level titles that contain a creation verb. Each label is sent to the
//! lookup backend and the candidate with the highest label similarity wins,
//! provided it clears the acceptance threshold.

pub mod catalog;
pub mod lexicon;
pub mod remote;
pub mod similarity;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{EntityUri, KnowHowGraph};
pub use catalog::{Catalog, CatalogEntity, CatalogEntry, LookupBackend};
pub use lexicon::{detect_output, CreationLexicon};
pub use remote::{RemoteLookup, RemoteLookupConfig};
pub use similarity::similarity;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("catalog error: {message}")]
    Catalog { message: String },
    #[error("lookup backend unavailable: {message}")]
    BackendUnavailable { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkDirection {
    Input,
    Output,
}

impl LinkDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkDirection::Input => "input",
            LinkDirection::Output => "output",
        }
    }
}

/// A typed link between a process and a catalog entity.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityLink {
    pub process_entity: EntityUri,
    pub catalog_entity: CatalogEntity,
    pub direction: LinkDirection,
    pub similarity: f64,
}

/// Indirect producer→consumer link between two processes composed from an
/// Output link and an Input link on the same catalog entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IoLink {
    pub producer: EntityUri,
    pub consumer: EntityUri,
    pub via: String,
}

#[derive(Debug, Clone)]
pub struct LinkerConfig {
    /// Acceptance threshold: a candidate below this similarity is discarded.
    pub tau: f64,
    pub max_hits: usize,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            tau: 0.8,
            max_hits: 10,
        }
    }
}

/// Pick the candidate with the highest label similarity; ties go to the
/// smallest lookup rank. `None` when the best similarity is below `tau`.
pub fn choose_candidate(
    label: &str,
    candidates: &[CatalogEntity],
    tau: f64,
) -> Option<(CatalogEntity, f64)> {
    let mut best: Option<(f64, &CatalogEntity)> = None;
    for candidate in candidates {
        let score = similarity(label, &candidate.label);
        let better = match &best {
            None => true,
            Some((best_score, best_candidate)) => {
                score > *best_score
                    || (score == *best_score && candidate.lookup_rank < best_candidate.lookup_rank)
            }
        };
        if better {
            best = Some((score, candidate));
        }
    }
    best.filter(|(score, _)| *score >= tau)
        .map(|(score, c)| (c.clone(), score))
}

/// Result of linking a corpus: the accepted links plus the labels whose
/// lookup failed (remote backends only; failures never abort the run).
#[derive(Debug, Default)]
pub struct LinkOutcome {
    pub links: Vec<EntityLink>,
    pub failures: Vec<(String, String)>,
}

/// Discover input and output links for every top-level process.
///
/// Inputs: each requirement label is looked up and the best candidate, if it
/// clears `tau`, links the owning process as a consumer of that entity.
/// Outputs: a creation verb in the process title nominates the verb's object
/// phrase, which is looked up the same way.
pub fn link_corpus(
    graph: &KnowHowGraph,
    backend: &dyn LookupBackend,
    lexicon: &CreationLexicon,
    tokenizer: &crate::decompose::Tokenizer,
    config: &LinkerConfig,
) -> LinkOutcome {
    let mut outcome = LinkOutcome::default();
    let mut seen: BTreeSet<(EntityUri, LinkDirection, String)> = BTreeSet::new();

    for task in graph.top_level() {
        for requirement in graph.requirements_of(&task.uri) {
            match backend.lookup(&requirement.label, config.max_hits) {
                Ok(candidates) => {
                    if let Some((winner, score)) =
                        choose_candidate(&requirement.label, &candidates, config.tau)
                    {
                        if seen.insert((
                            task.uri.clone(),
                            LinkDirection::Input,
                            winner.catalog_uri.clone(),
                        )) {
                            outcome.links.push(EntityLink {
                                process_entity: task.uri.clone(),
                                catalog_entity: winner,
                                direction: LinkDirection::Input,
                                similarity: score,
                            });
                        }
                    }
                }
                Err(e) => outcome
                    .failures
                    .push((requirement.label.clone(), e.to_string())),
            }
        }

        let Some(object) = detect_output(&task.label, lexicon, tokenizer) else {
            continue;
        };
        match backend.lookup(&object, config.max_hits) {
            Ok(candidates) => {
                if let Some((winner, score)) = choose_candidate(&object, &candidates, config.tau) {
                    if seen.insert((
                        task.uri.clone(),
                        LinkDirection::Output,
                        winner.catalog_uri.clone(),
                    )) {
                        outcome.links.push(EntityLink {
                            process_entity: task.uri.clone(),
                            catalog_entity: winner,
                            direction: LinkDirection::Output,
                            similarity: score,
                        });
                    }
                }
            }
            Err(e) => outcome.failures.push((object, e.to_string())),
        }
    }
    outcome
}

/// Join Output and Input links on their catalog entity:
/// `{ (P→Q, via E) : Output(P, E) ∧ Input(Q, E) ∧ P ≠ Q }`.
pub fn compose_io_links(links: &[EntityLink]) -> Vec<IoLink> {
    let mut inputs: BTreeMap<&str, Vec<&EntityUri>> = BTreeMap::new();
    for link in links.iter().filter(|l| l.direction == LinkDirection::Input) {
        inputs
            .entry(&link.catalog_entity.catalog_uri)
            .or_default()
            .push(&link.process_entity);
    }
    let mut out = BTreeSet::new();
    for link in links
        .iter()
        .filter(|l| l.direction == LinkDirection::Output)
    {
        let Some(consumers) = inputs.get(link.catalog_entity.catalog_uri.as_str()) else {
            continue;
        };
        for consumer in consumers {
            if *consumer != &link.process_entity {
                out.insert(IoLink {
                    producer: link.process_entity.clone(),
                    consumer: (*consumer).clone(),
                    via: link.catalog_entity.catalog_uri.clone(),
                });
            }
        }
    }
    out.into_iter().collect()
}

/// Precision of a composed link is the probability that both constituent
/// links are correct.
pub fn composed_precision(p_in: f64, p_out: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p_in), "p_in out of range: {p_in}");
    assert!((0.0..=1.0).contains(&p_out), "p_out out of range: {p_out}");
    p_in * p_out
}

/// `entity-links.tsv` rows: process URI, direction, catalog URI, similarity.
pub fn entity_links_to_tsv(links: &[EntityLink]) -> String {
    let mut rows: Vec<String> = links
        .iter()
        .map(|l| {
            format!(
                "{}\t{}\t{}\t{}",
                l.process_entity,
                l.direction.as_str(),
                l.catalog_entity.catalog_uri,
                l.similarity
            )
        })
        .collect();
    rows.sort();
    let mut out = rows.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

/// `io-links.tsv` rows: producer URI, consumer URI, shared catalog URI.
pub fn io_links_to_tsv(links: &[IoLink]) -> String {
    let mut out = String::new();
    for link in links {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            link.producer, link.consumer, link.via
        ));
    }
    out
}
