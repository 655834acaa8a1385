//! Entity-linking tests: candidate choice, corpus linking against the
//! offline catalog, oracle equivalence for the link set and the I/O join,
//! and the remote backend against a local mock server.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::net::TcpListener;

use prohow::decompose::Tokenizer;
use prohow::extract::extract_corpus;
use prohow::graph::vocab::DEFAULT_DATA_NS;
use prohow::graph::{EntityKind, EntityUri, KnowHowGraph};
use prohow::link::{
    choose_candidate, compose_io_links, composed_precision, detect_output, link_corpus, Catalog,
    CatalogEntity, CreationLexicon, EntityLink, IoLink, LinkDirection, LinkerConfig, LookupBackend,
    RemoteLookup, RemoteLookupConfig,
};
use prohow::synth;
use prohow::util::SplitMix64;

use proptest::prelude::*;

const BASE: &str = DEFAULT_DATA_NS;

fn candidate(uri: &str, label: &str, rank: usize) -> CatalogEntity {
    CatalogEntity {
        catalog_uri: uri.to_string(),
        label: label.to_string(),
        types: BTreeSet::new(),
        lookup_rank: rank,
    }
}

#[test]
fn exact_candidate_wins_with_similarity_one() {
    let candidates = vec![
        candidate("u:milkshake", "Milkshake", 1),
        candidate("u:milk", "Milk", 2),
    ];
    let (winner, score) = choose_candidate("milk", &candidates, 0.8).unwrap();
    assert_eq!(winner.catalog_uri, "u:milk");
    assert_eq!(score, 1.0);
}

#[test]
fn equal_similarity_breaks_ties_by_lookup_rank() {
    // Both candidates are one edit away from the query.
    let candidates = vec![candidate("u:b", "milb", 2), candidate("u:a", "mila", 1)];
    let (winner, _) = choose_candidate("milk", &candidates, 0.5).unwrap();
    assert_eq!(winner.catalog_uri, "u:a");
}

#[test]
fn all_below_threshold_yields_none() {
    let candidates = vec![candidate("u:a", "completely different", 1)];
    assert!(choose_candidate("milk", &candidates, 0.8).is_none());
}

#[test]
fn candidate_order_never_changes_the_winner() {
    let mut candidates = vec![
        candidate("u:a", "mila", 1),
        candidate("u:b", "milb", 2),
        candidate("u:c", "milk", 3),
        candidate("u:d", "silk", 4),
    ];
    let (expected, _) = choose_candidate("milk", &candidates, 0.5).unwrap();
    let mut rng = SplitMix64::new(9);
    for _ in 0..20 {
        rng.shuffle(&mut candidates);
        let (winner, _) = choose_candidate("milk", &candidates, 0.5).unwrap();
        assert_eq!(winner.catalog_uri, expected.catalog_uri);
    }
}

#[test]
fn pancake_fixture_links_input_and_output() {
    let doc = synth::pancake_document();
    let (graph, _) = prohow::extract::extract(&doc, BASE);
    let catalog = Catalog::from_tsv(concat!(
        "http://example.org/resource/Milk\tMilk\t\n",
        "http://example.org/resource/Pancake\tPancake\t\n",
    ))
    .unwrap();
    let outcome = link_corpus(
        &graph,
        &catalog,
        &CreationLexicon::bundled(),
        &Tokenizer::bundled(),
        &LinkerConfig::default(),
    );
    assert!(outcome.failures.is_empty());

    let task = synth::main_task_uri(BASE, "wikihow/Make-a-Pancake");
    let inputs: Vec<&EntityLink> = outcome
        .links
        .iter()
        .filter(|l| l.direction == LinkDirection::Input)
        .collect();
    let outputs: Vec<&EntityLink> = outcome
        .links
        .iter()
        .filter(|l| l.direction == LinkDirection::Output)
        .collect();
    assert_eq!(
        inputs.len(),
        1,
        "only the milk requirement matches the catalog"
    );
    assert_eq!(
        inputs[0].catalog_entity.catalog_uri,
        "http://example.org/resource/Milk"
    );
    assert_eq!(inputs[0].process_entity, task);
    assert_eq!(inputs[0].similarity, 1.0);
    assert_eq!(outputs.len(), 1, "the title names a pancake as its output");
    assert_eq!(
        outputs[0].catalog_entity.catalog_uri,
        "http://example.org/resource/Pancake"
    );
    assert_eq!(outputs[0].process_entity, task);
}

#[test]
fn task_without_verbs_or_requirements_links_nothing() {
    let json = r#"{
        "doc_id": "wikihow/Idle", "title": "stay idle",
        "methods": [{"ordered": true, "steps": [{"headline": "sit still"}]}]
    }"#;
    let doc = prohow::ingest::parse_canonical(json.as_bytes()).unwrap();
    let (graph, _) = prohow::extract::extract(&doc, BASE);
    let outcome = link_corpus(
        &graph,
        &synth::catalog(),
        &CreationLexicon::bundled(),
        &Tokenizer::bundled(),
        &LinkerConfig::default(),
    );
    assert!(outcome.links.is_empty());
}

/// Brute-force re-implementation of corpus linking: loop over all entities
/// without indexes or early exits, recomputing candidate choice inline.
fn brute_force_links(
    graph: &KnowHowGraph,
    catalog: &Catalog,
    config: &LinkerConfig,
) -> BTreeSet<(EntityUri, &'static str, String)> {
    let lexicon = CreationLexicon::bundled();
    let tokenizer = Tokenizer::bundled();
    let mut out = BTreeSet::new();
    for task in graph.entities().filter(|e| e.kind == EntityKind::MainTask) {
        for requirement in graph.requirements_of(&task.uri) {
            let candidates = catalog.lookup(&requirement.label, config.max_hits).unwrap();
            if let Some((winner, _)) = choose_candidate(&requirement.label, &candidates, config.tau)
            {
                out.insert((task.uri.clone(), "input", winner.catalog_uri));
            }
        }
        if let Some(object) = detect_output(&task.label, &lexicon, &tokenizer) {
            let candidates = catalog.lookup(&object, config.max_hits).unwrap();
            if let Some((winner, _)) = choose_candidate(&object, &candidates, config.tau) {
                out.insert((task.uri.clone(), "output", winner.catalog_uri));
            }
        }
    }
    out
}

#[test]
fn corpus_linking_matches_brute_force_oracle() {
    let docs = synth::corpus(77, 200);
    let (graph, _) = extract_corpus(&docs, BASE).unwrap();
    let catalog = synth::catalog();
    let config = LinkerConfig::default();
    let outcome = link_corpus(
        &graph,
        &catalog,
        &CreationLexicon::bundled(),
        &Tokenizer::bundled(),
        &config,
    );
    assert!(!outcome.links.is_empty(), "fixture must produce links");

    let ours: BTreeSet<(EntityUri, &'static str, String)> = outcome
        .links
        .iter()
        .map(|l| {
            (
                l.process_entity.clone(),
                match l.direction {
                    LinkDirection::Input => "input",
                    LinkDirection::Output => "output",
                },
                l.catalog_entity.catalog_uri.clone(),
            )
        })
        .collect();
    assert_eq!(ours, brute_force_links(&graph, &catalog, &config));
}

#[test]
fn every_emitted_link_clears_the_threshold_and_lowering_tau_only_adds() {
    let docs = synth::corpus(78, 60);
    let (graph, _) = extract_corpus(&docs, BASE).unwrap();
    let catalog = synth::catalog();
    let lexicon = CreationLexicon::bundled();
    let tokenizer = Tokenizer::bundled();

    let strict = LinkerConfig {
        tau: 0.9,
        ..LinkerConfig::default()
    };
    let loose = LinkerConfig {
        tau: 0.6,
        ..LinkerConfig::default()
    };
    let strict_links = link_corpus(&graph, &catalog, &lexicon, &tokenizer, &strict).links;
    let loose_links = link_corpus(&graph, &catalog, &lexicon, &tokenizer, &loose).links;

    assert!(strict_links.iter().all(|l| l.similarity >= 0.9));
    let key = |l: &EntityLink| {
        (
            l.process_entity.clone(),
            l.direction,
            l.catalog_entity.catalog_uri.clone(),
        )
    };
    let strict_set: BTreeSet<_> = strict_links.iter().map(key).collect();
    let loose_set: BTreeSet<_> = loose_links.iter().map(key).collect();
    assert!(
        strict_set.is_subset(&loose_set),
        "lowering tau never removes links"
    );
}

// --- I/O composition --------------------------------------------------------

fn output_link(process: &EntityUri, via: &str) -> EntityLink {
    EntityLink {
        process_entity: process.clone(),
        catalog_entity: candidate(via, via, 1),
        direction: LinkDirection::Output,
        similarity: 1.0,
    }
}

fn input_link(process: &EntityUri, via: &str) -> EntityLink {
    EntityLink {
        process_entity: process.clone(),
        catalog_entity: candidate(via, via, 1),
        direction: LinkDirection::Input,
        similarity: 1.0,
    }
}

#[test]
fn cover_letter_example_composes_one_io_link() {
    let writer = synth::main_task_uri(BASE, "wikihow/Write-a-Cover-Letter");
    let applicant = synth::main_task_uri(BASE, "wikihow/Apply-for-a-Job");
    let links = vec![
        output_link(&writer, "u:CoverLetter"),
        input_link(&applicant, "u:CoverLetter"),
    ];
    let composed = compose_io_links(&links);
    assert_eq!(
        composed,
        vec![IoLink {
            producer: writer,
            consumer: applicant,
            via: "u:CoverLetter".into()
        }]
    );
}

#[test]
fn inputs_alone_compose_nothing() {
    let consumer = synth::main_task_uri(BASE, "wikihow/Apply-for-a-Job");
    let links = vec![input_link(&consumer, "u:CoverLetter")];
    assert!(compose_io_links(&links).is_empty());
}

#[test]
fn self_pairs_are_excluded() {
    let process = synth::main_task_uri(BASE, "wikihow/Make-Bread");
    let links = vec![
        output_link(&process, "u:Bread"),
        input_link(&process, "u:Bread"),
    ];
    assert!(compose_io_links(&links).is_empty());
}

/// Quadratic oracle: double loop over all link pairs.
fn quadratic_io_join(links: &[EntityLink]) -> BTreeSet<IoLink> {
    let mut out = BTreeSet::new();
    for a in links {
        for b in links {
            if a.direction == LinkDirection::Output
                && b.direction == LinkDirection::Input
                && a.catalog_entity.catalog_uri == b.catalog_entity.catalog_uri
                && a.process_entity != b.process_entity
            {
                out.insert(IoLink {
                    producer: a.process_entity.clone(),
                    consumer: b.process_entity.clone(),
                    via: a.catalog_entity.catalog_uri.clone(),
                });
            }
        }
    }
    out
}

#[test]
fn io_composition_matches_quadratic_oracle_over_random_fixtures() {
    for trial in 0..50u64 {
        let mut rng = SplitMix64::new(1000 + trial);
        let n_processes = 4 + rng.gen_range(16) as usize;
        let processes: Vec<EntityUri> = (0..n_processes)
            .map(|i| synth::main_task_uri(BASE, &format!("wikihow/Process-{trial}-{i}")))
            .collect();
        let entities = ["u:A", "u:B", "u:C", "u:D", "u:E"];
        let n_links = 10 + rng.gen_range(41) as usize;
        let links: Vec<EntityLink> = (0..n_links)
            .map(|_| {
                let process = &processes[rng.gen_range(n_processes as u64) as usize];
                let via = entities[rng.gen_range(entities.len() as u64) as usize];
                if rng.gen_range(2) == 0 {
                    output_link(process, via)
                } else {
                    input_link(process, via)
                }
            })
            .collect();
        let fast: BTreeSet<IoLink> = compose_io_links(&links).into_iter().collect();
        assert_eq!(fast, quadratic_io_join(&links), "trial {trial}");
    }
}

#[test]
fn composed_precision_is_the_product() {
    assert!((composed_precision(0.96, 0.983) - 0.94368).abs() < 1e-12);
    assert_eq!(composed_precision(1.0, 0.37), 0.37);
    assert_eq!(composed_precision(0.0, 0.9), 0.0);
}

// --- detect_output properties -----------------------------------------------

proptest! {
    #[test]
    fn detected_phrase_never_starts_with_verb_or_determiner(
        words in proptest::collection::vec("[a-z]{1,8}", 1..8)
    ) {
        let lexicon = CreationLexicon::bundled();
        let tokenizer = Tokenizer::bundled();
        let title = words.join(" ");
        if let Some(phrase) = detect_output(&title, &lexicon, &tokenizer) {
            prop_assert!(!phrase.is_empty());
            let first = phrase.split(' ').next().unwrap();
            prop_assert!(!lexicon.contains(first), "phrase {phrase:?} starts with a creation verb");
            prop_assert!(!["a", "an", "the", "your", "some"].contains(&first));
            prop_assert!(!tokenizer.is_stopword(first));
        }
    }
}

// --- remote backend ----------------------------------------------------------

/// Minimal single-threaded HTTP server answering a fixed number of requests.
fn spawn_mock_lookup(
    responses: Vec<(u16, String)>,
) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().expect("accept");
            let mut buffer = [0u8; 4096];
            let n = stream.read(&mut buffer).unwrap_or(0);
            let request = String::from_utf8_lossy(&buffer[..n]).to_string();
            seen.push(request.lines().next().unwrap_or_default().to_string());
            let reason = if status == 200 {
                "OK"
            } else {
                "Internal Server Error"
            };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
        seen
    });
    (format!("http://{addr}/lookup"), handle)
}

#[test]
fn remote_backend_parses_ranked_candidates() {
    let body = r#"{"results": [
        {"uri": "http://example.org/resource/Milk", "label": "Milk", "classes": ["http://example.org/ontology/Food"]},
        {"uri": "http://example.org/resource/Milkshake", "label": "Milkshake"}
    ]}"#;
    let (endpoint, server) = spawn_mock_lookup(vec![(200, body.to_string())]);
    let backend = RemoteLookup::new(RemoteLookupConfig {
        endpoint,
        retries: 0,
        ..RemoteLookupConfig::default()
    });
    let hits = backend.lookup("milk", 5).unwrap();
    assert_eq!(hits.len(), 2);
    assert_eq!(hits[0].label, "Milk");
    assert_eq!(hits[0].lookup_rank, 1);
    assert_eq!(hits[1].lookup_rank, 2);
    assert!(hits[0].types.contains("http://example.org/ontology/Food"));
    let requests = server.join().unwrap();
    assert!(requests[0].contains("query=milk"), "{requests:?}");
    assert!(requests[0].contains("max-hits=5"));
}

#[test]
fn remote_backend_retries_then_fails_the_single_label() {
    let body = r#"{"results": [{"uri": "u:ok", "label": "ok"}]}"#;
    let (endpoint, server) = spawn_mock_lookup(vec![
        (500, "{}".to_string()),
        (500, "{}".to_string()),
        (200, body.to_string()),
    ]);
    let backend = RemoteLookup::new(RemoteLookupConfig {
        endpoint,
        retries: 2,
        ..RemoteLookupConfig::default()
    });
    let hits = backend.lookup("anything", 3).unwrap();
    assert_eq!(hits.len(), 1, "third attempt succeeds");
    server.join().unwrap();

    let (endpoint, server) = spawn_mock_lookup(vec![(500, "{}".to_string())]);
    let backend = RemoteLookup::new(RemoteLookupConfig {
        endpoint,
        retries: 0,
        ..RemoteLookupConfig::default()
    });
    assert!(backend.lookup("anything", 3).is_err());
    server.join().unwrap();
}
