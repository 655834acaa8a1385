//! Deterministic synthetic fixtures: documents, catalogs, graphs, and
//! training sets with known structure. Used by the test suites and by the
//! bundled demo corpus generator; everything here is a pure function of its
//! seed.

use std::collections::BTreeSet;

use crate::decompose::{self, InvertedIndex, LabeledPair, Tokenizer, TrainingSample};
use crate::extract::extract_corpus;
use crate::graph::{
    mint_uri, EntityKind, KnowHowGraph, Origin, Property, RawTriple, RdfNode, Relation,
};
use crate::ingest::{parse_canonical, HowToDocument};
use crate::link::{Catalog, CatalogEntry};
use crate::util::SplitMix64;

/// The hand-written running-example fixture document.
pub fn pancake_json() -> &'static str {
    include_str!("../../assets/fixtures/pancake.howto.json")
}

pub fn pancake_document() -> HowToDocument {
    parse_canonical(pancake_json().as_bytes()).expect("bundled fixture is valid")
}

const NOUNS: &[&str] = &[
    "pancake",
    "dough",
    "butter",
    "cheese",
    "bread",
    "cake",
    "resume",
    "cover letter",
    "milk",
    "flour",
    "omelet",
    "sugar",
    "jam",
    "tea",
    "coffee",
    "soup",
    "salad",
    "pasta",
    "sauce",
    "garden",
    "shelf",
    "kite",
    "candle",
    "soap",
    "scarf",
    "pillow",
    "basket",
    "ladder",
    "panel",
    "bench",
];

const CREATION_VERBS: &[&str] = &["make", "bake", "cook", "prepare", "build", "brew", "write"];
const OTHER_VERBS: &[&str] = &["clean", "organize", "repair", "store", "choose", "measure"];
const ACTIONS: &[&str] = &[
    "mix", "heat", "cut", "fold", "measure", "pour", "shape", "press",
];
const CATEGORIES: &[&str] = &["Cooking", "Crafts", "Home", "Office", "Outdoors"];

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn slug(title: &str) -> String {
    title
        .split_whitespace()
        .map(capitalize)
        .collect::<Vec<_>>()
        .join("-")
        .replace(|c: char| !(c.is_alphanumeric() || c == '-'), "")
}

/// A catalog whose entries cover every noun in the document pool; 30 rows.
pub fn catalog() -> Catalog {
    let entries = NOUNS
        .iter()
        .map(|noun| CatalogEntry {
            catalog_uri: format!("http://example.org/resource/{}", slug(&capitalize(noun))),
            label: capitalize(noun),
            types: BTreeSet::from(["http://example.org/ontology/Thing".to_string()]),
        })
        .collect();
    Catalog::new(entries)
}

/// Deterministic synthetic corpus. Documents cover both repositories,
/// single- and multi-method layouts, ordered and unordered lists, substeps,
/// details, requirements drawn from the catalog nouns, and occasional
/// user-authored cross references.
pub fn corpus(seed: u64, n_docs: usize) -> Vec<HowToDocument> {
    let mut rng = SplitMix64::new(SplitMix64::derive(seed, 0xC0FFEE));
    let mut docs: Vec<HowToDocument> = Vec::with_capacity(n_docs);
    let mut used_ids = BTreeSet::new();

    // Pre-pick each document's noun and verb so cross references and
    // title-matching steps can point at other documents.
    let mut plans = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let noun = NOUNS[rng.gen_range(NOUNS.len() as u64) as usize];
        let creation = rng.gen_range(4) != 0; // three in four titles have a creation verb
        let verb = if creation {
            CREATION_VERBS[rng.gen_range(CREATION_VERBS.len() as u64) as usize]
        } else {
            OTHER_VERBS[rng.gen_range(OTHER_VERBS.len() as u64) as usize]
        };
        let repo = if i % 4 == 3 { "snapguide" } else { "wikihow" };
        let title = format!("how to {verb} a {noun}");
        let mut doc_id = format!("{repo}/{}", slug(&title));
        if !used_ids.insert(doc_id.clone()) {
            doc_id = format!("{doc_id}-{i}");
            used_ids.insert(doc_id.clone());
        }
        plans.push((doc_id, title, noun, verb));
    }

    for (i, (doc_id, title, noun, _verb)) in plans.iter().enumerate() {
        let n_methods = if rng.gen_range(4) == 0 { 2 } else { 1 };
        let ordered = rng.gen_range(5) != 0;
        let n_categories = 1 + rng.gen_range(2) as usize;
        let mut categories: Vec<String> = Vec::new();
        let noun_index = NOUNS.iter().position(|n| n == noun).unwrap_or(0);
        categories.push(CATEGORIES[noun_index % CATEGORIES.len()].to_string());
        while categories.len() < n_categories {
            let pick = CATEGORIES[rng.gen_range(CATEGORIES.len() as u64) as usize].to_string();
            if !categories.contains(&pick) {
                categories.push(pick);
            }
        }

        let n_requirements = rng.gen_range(4) as usize;
        let mut requirements = Vec::new();
        let mut req_seen = BTreeSet::new();
        for _ in 0..n_requirements {
            let req_noun = NOUNS[rng.gen_range(NOUNS.len() as u64) as usize];
            if !req_seen.insert(req_noun) {
                continue;
            }
            // One in four requirements carries a community cross reference
            // to another document about that noun, when one exists.
            let target = plans
                .iter()
                .enumerate()
                .find(|(j, (_, _, n, v))| *j != i && n == &req_noun && CREATION_VERBS.contains(v))
                .map(|(_, (id, _, _, _))| id.clone());
            let with_ref = rng.gen_range(4) == 0;
            requirements.push(match (with_ref, target) {
                (true, Some(target)) => {
                    serde_json::json!({ "text": req_noun, "ref": target })
                }
                _ => serde_json::json!(req_noun),
            });
        }

        let mut methods = Vec::new();
        for m in 0..n_methods {
            let n_steps = 2 + rng.gen_range(3) as usize;
            let mut steps = Vec::new();
            for s in 0..n_steps {
                let action = ACTIONS[rng.gen_range(ACTIONS.len() as u64) as usize];
                let object = NOUNS[rng.gen_range(NOUNS.len() as u64) as usize];
                // Some steps restate another document's task so the
                // decomposition linker has something to find.
                let mirrored = rng.gen_range(3) == 0;
                let headline = if mirrored {
                    let (_, other_title, _, _) = &plans[rng.gen_range(plans.len() as u64) as usize];
                    other_title.trim_start_matches("how to ").to_string()
                } else {
                    format!("{action} the {object}")
                };
                let detail = (rng.gen_range(3) == 0)
                    .then(|| format!("take care that the {object} stays intact"));
                let with_ref = rng.gen_range(6) == 0;
                let target = plans
                    .iter()
                    .enumerate()
                    .find(|(j, (_, t, _, _))| {
                        *j != i && headline.contains(t.trim_start_matches("how to "))
                    })
                    .map(|(_, (id, _, _, _))| id.clone());
                let substeps: Vec<serde_json::Value> = if s == 0 && rng.gen_range(4) == 0 {
                    (0..2)
                        .map(|k| {
                            serde_json::json!({
                                "headline": format!("{} the {} part {}", ACTIONS[k], noun, k + 1)
                            })
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                let mut step = serde_json::json!({ "headline": headline });
                if let Some(detail) = detail {
                    step["detail"] = serde_json::json!(detail);
                }
                if !substeps.is_empty() {
                    step["substeps"] = serde_json::json!(substeps);
                }
                if with_ref {
                    if let Some(target) = target {
                        step["ref"] = serde_json::json!(target);
                    }
                }
                steps.push(step);
            }
            let mut method = serde_json::json!({ "ordered": ordered, "steps": steps });
            if n_methods > 1 && m > 0 {
                method["name"] = serde_json::json!(format!("{title} without tools"));
            }
            methods.push(method);
        }

        let doc = serde_json::json!({
            "doc_id": doc_id,
            "title": title,
            "language": "en",
            "categories": categories,
            "requirements": requirements,
            "methods": methods,
        });
        let bytes = serde_json::to_vec(&doc).expect("synthetic document serializes");
        docs.push(parse_canonical(&bytes).expect("synthetic document is valid"));
    }
    docs
}

/// A randomized but valid graph: a small extracted corpus plus a few
/// machine-generated links and foreign side-list triples. Exercises every
/// serializable construct.
pub fn random_graph(seed: u64, base: &str) -> KnowHowGraph {
    let mut rng = SplitMix64::new(SplitMix64::derive(seed, 0x6772617068));
    let n_docs = 2 + rng.gen_range(5) as usize;
    let docs = corpus(SplitMix64::derive(seed, 1), n_docs);
    let (mut graph, _) = extract_corpus(&docs, base).expect("synthetic corpus has unique ids");

    let primitives: Vec<_> = graph
        .entities()
        .filter(|e| graph.is_primitive(&e.uri).expect("entity of this graph"))
        .map(|e| (e.uri.clone(), e.source_doc.clone()))
        .collect();
    let tasks: Vec<_> = graph
        .entities()
        .filter(|e| e.kind == EntityKind::MainTask)
        .map(|e| (e.uri.clone(), e.source_doc.clone()))
        .collect();
    let n_links = rng.gen_range(4);
    for _ in 0..n_links {
        let (primitive, p_doc) = &primitives[rng.gen_range(primitives.len() as u64) as usize];
        let (task, t_doc) = &tasks[rng.gen_range(tasks.len() as u64) as usize];
        if p_doc == t_doc {
            continue;
        }
        let _ = graph.add_relation(Relation {
            subject: primitive.clone(),
            property: Property::HasMethod,
            object: task.clone(),
            origin: Origin::MachineLinked,
        });
    }

    for k in 0..rng.gen_range(3) {
        let (task, _) = &tasks[rng.gen_range(tasks.len() as u64) as usize];
        graph.add_extra_triple(RawTriple {
            subject: RdfNode::iri(task.as_str()),
            predicate: format!("http://example.org/vocab#note{k}"),
            object: RdfNode::literal(format!("synthetic side note {k}")),
        });
    }
    graph
}

/// Linearly separable training set: the label-Jaccard feature (index 3)
/// decides the class, with a margin around the 0.5 boundary. All other
/// features are noise.
pub fn separable_samples(seed: u64, n: usize) -> Vec<TrainingSample> {
    let schema = crate::decompose::FeatureSchema::default_v1();
    let mut rng = SplitMix64::new(SplitMix64::derive(seed, 0x5eba8a8));
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i % 2 == 0;
        let jaccard = if positive {
            0.55 + 0.45 * rng.next_f64()
        } else {
            0.45 * rng.next_f64()
        };
        let values: Vec<f64> = (0..schema.len())
            .map(|f| if f == 3 { jaccard } else { rng.next_f64() })
            .collect();
        samples.push(TrainingSample {
            features: crate::decompose::FeatureVector::new(values),
            label: positive,
        });
    }
    samples
}

/// Label retrieved candidate pairs with a known rule (label-token Jaccard at
/// least one half), yielding a labeled-pairs set that a classifier can learn
/// exactly. Guaranteed to contain both classes or panics — enlarge the
/// corpus if that ever fires.
pub fn labeled_pairs_by_rule(
    graph: &KnowHowGraph,
    index: &InvertedIndex,
    tokenizer: &Tokenizer,
    k: usize,
    max_pairs: usize,
) -> Vec<LabeledPair> {
    let mut pairs = Vec::new();
    for complex in graph.top_level() {
        if pairs.len() >= max_pairs {
            break;
        }
        for candidate in index.retrieve_candidates(complex, k, tokenizer) {
            if pairs.len() >= max_pairs {
                break;
            }
            let complex_entity = graph
                .entity(&candidate.complex)
                .expect("candidate from graph");
            let primitive_entity = graph
                .entity(&candidate.primitive)
                .expect("candidate from graph");
            let a = tokenizer.token_set(&complex_entity.label);
            let b = tokenizer.token_set(&primitive_entity.label);
            let union = a.union(&b).count();
            let jaccard = if union == 0 {
                0.0
            } else {
                a.intersection(&b).count() as f64 / union as f64
            };
            pairs.push(LabeledPair {
                complex: candidate.complex,
                primitive: candidate.primitive,
                label: jaccard >= 0.5,
            });
        }
    }
    assert!(
        pairs.iter().any(|p| p.label) && pairs.iter().any(|p| !p.label),
        "rule-labeled fixture must contain both classes"
    );
    pairs
}

/// Mint the main-task URI of a document id, as the extractor would.
pub fn main_task_uri(base: &str, doc_id: &str) -> crate::graph::EntityUri {
    mint_uri(base, doc_id, "main").expect("fixture ids are valid")
}

/// Everything the end-to-end pipeline needs, generated in one call.
pub struct FixtureBundle {
    pub docs: Vec<HowToDocument>,
    pub catalog: Catalog,
    pub labeled_pairs: Vec<LabeledPair>,
}

pub fn fixture_bundle(seed: u64, n_docs: usize, base: &str) -> FixtureBundle {
    let docs = corpus(seed, n_docs);
    let catalog = catalog();
    let (graph, _) = extract_corpus(&docs, base).expect("synthetic corpus has unique ids");
    let tokenizer = Tokenizer::bundled();
    let index = decompose::build_index(&graph, &tokenizer);
    let labeled_pairs = labeled_pairs_by_rule(&graph, &index, &tokenizer, 20, 400);
    FixtureBundle {
        docs,
        catalog,
        labeled_pairs,
    }
}
