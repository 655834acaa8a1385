//! Writer for the bundled demo fixtures: a 50-document synthetic corpus, one
//! archived HTML page, the 30-entry catalog, a rule-labeled pairs file, and
//! a ready-to-run config. Regenerating with the same seed reproduces the
//! files byte for byte.

use std::path::Path;

use anyhow::{Context, Result};

use prohow::decompose::{self, Tokenizer};
use prohow::extract::extract_corpus;
use prohow::graph::vocab::DEFAULT_DATA_NS;
use prohow::ingest::{parse_wikihow_markup, serialize_canonical};
use prohow::synth;

pub const FIXTURE_SEED: u64 = 42;
pub const FIXTURE_DOCS: usize = 50;

/// An archived instructions page, exercising the markup adapter end to end.
pub const ARCHIVED_PANCAKE_PAGE: &str = r##"<!DOCTYPE html>
<html><head><title>How to Make a Pancake - wikiHow</title></head>
<body>
<ul id="breadcrumb"><li><a href="/Home">Home</a></li><li><a href="/Category:Recipes">Recipes</a></li><li><a href="/Category:Breakfast">Breakfast</a></li></ul>
<h1>How to Make a Pancake</h1>
<h2>Ingredients</h2>
<ul><li>milk</li><li>eggs</li><li>flour</li></ul>
<h2>Steps</h2>
<h3>Method 1 of 2: Classic pancakes</h3>
<ol>
  <li><b>Mix the ingredients.</b> Whisk until smooth.</li>
  <li><b>Put the mix on a pan.</b></li>
  <li>Flip the pancake when ready</li>
</ol>
<h3>Method 2 of 2: Lemon pancakes</h3>
<ol>
  <li><b>Squeeze a lemon into the mix.</b></li>
  <li><b>Cook the lemon mix.</b></li>
</ol>
</body></html>
"##;

const CONFIG_TEMPLATE: &str = "\
# Demo pipeline configuration. Paths are relative to this file.
corpus_dir = corpus
output_dir = out
catalog = catalog.tsv
labels = labeled-pairs.tsv
seed = 42
tau = 0.8
index_k = 50
trees = 100
min_leaf = 1
cv_folds = 10
workers = 1
";

/// Write the full fixture tree under `dir`.
pub fn write_fixtures(dir: &Path) -> Result<()> {
    let corpus_dir = dir.join("corpus");
    std::fs::create_dir_all(&corpus_dir)
        .with_context(|| format!("cannot create {}", corpus_dir.display()))?;

    let docs = synth::corpus(FIXTURE_SEED, FIXTURE_DOCS);
    for doc in &docs {
        let name = format!("{}.howto.json", doc.doc_id.replace('/', "__"));
        std::fs::write(corpus_dir.join(name), serialize_canonical(doc))?;
    }
    std::fs::write(
        corpus_dir.join("How-to-Make-a-Pancake.html"),
        ARCHIVED_PANCAKE_PAGE,
    )?;

    let catalog = synth::catalog();
    std::fs::write(dir.join("catalog.tsv"), catalog.to_tsv())?;

    // Label candidate pairs over the full ingested corpus, page included,
    // exactly as the pipeline will see it.
    let mut all_docs = docs;
    all_docs.push(parse_wikihow_markup(ARCHIVED_PANCAKE_PAGE.as_bytes())?);
    let (graph, _) = extract_corpus(&all_docs, DEFAULT_DATA_NS)?;
    let tokenizer = Tokenizer::bundled();
    let index = decompose::build_index(&graph, &tokenizer);
    let pairs = synth::labeled_pairs_by_rule(&graph, &index, &tokenizer, 20, 400);
    std::fs::write(
        dir.join("labeled-pairs.tsv"),
        decompose::labeled_pairs_to_tsv(&pairs),
    )?;

    std::fs::write(dir.join("prohow.conf"), CONFIG_TEMPLATE)?;
    Ok(())
}
