//! Pipeline stages. Each stage reads the previous stage's artifacts from the
//! output directory and writes its own; rerunning a stage with unchanged
//! inputs rewrites byte-identical files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};

use prohow::decompose::{
    self, build_index, cross_validate, featurize_labeled_pairs, generate_links,
    labeled_pairs_from_tsv, train_forest, FeatureSchema, ForestHyperparams, ForestModel,
    InvertedIndex, Tokenizer,
};
use prohow::eval::{
    aggregate_total, compare, compare_tsv, coverage, covered_processes, extract_community_links,
    main_processes, precision, GoldJudgments, LinkType, MetricsReport,
};
use prohow::extract::{extract_corpus, report_from_tsv, report_to_tsv, ExtractionReport};
use prohow::graph::{self, EntityUri, KnowHowGraph, Property, RdfFormat};
use prohow::ingest::{
    parse_canonical, parse_wikihow_markup, serialize_canonical, HowToDocument, IngestError,
};
use prohow::link::{
    compose_io_links, link_corpus, Catalog, CreationLexicon, IoLink, LinkerConfig, LookupBackend,
    RemoteLookup, RemoteLookupConfig,
};
use prohow::util::par::par_map;

use crate::config::PipelineConfig;

/// On-disk artifact layout under the output directory.
pub struct Artifacts {
    pub canonical_dir: PathBuf,
    pub ingest_skipped: PathBuf,
    pub graph: PathBuf,
    pub extraction_report: PathBuf,
    pub entity_links: PathBuf,
    pub io_links: PathBuf,
    pub index: PathBuf,
    pub forest: PathBuf,
    pub cv_metrics: PathBuf,
    pub decomposition_links: PathBuf,
    pub report_text: PathBuf,
    pub report_tsv: PathBuf,
}

impl Artifacts {
    pub fn under(output_dir: &Path) -> Self {
        Artifacts {
            canonical_dir: output_dir.join("canonical"),
            ingest_skipped: output_dir.join("ingest-skipped.tsv"),
            graph: output_dir.join("graph.nt"),
            extraction_report: output_dir.join("extraction-report.tsv"),
            entity_links: output_dir.join("entity-links.tsv"),
            io_links: output_dir.join("io-links.tsv"),
            index: output_dir.join("index.bin"),
            forest: output_dir.join("forest.model"),
            cv_metrics: output_dir.join("cv-metrics.tsv"),
            decomposition_links: output_dir.join("decomposition-links.tsv"),
            report_text: output_dir.join("report.txt"),
            report_tsv: output_dir.join("report.tsv"),
        }
    }
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub artifacts: Artifacts,
}

fn require(stage: &str, path: &Path, producer: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        bail!(
            "stage {stage}: missing input artifact {} — run `{producer}` first",
            path.display()
        )
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot move into {}", path.display()))?;
    Ok(())
}

/// Matching files anywhere under `dir`, in sorted order.
fn sorted_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, extensions: &[&str], files: &mut Vec<PathBuf>) -> Result<()> {
        let entries =
            std::fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, extensions, files)?;
                continue;
            }
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if extensions.iter().any(|ext| name.ends_with(ext)) {
                files.push(path.clone());
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, extensions, &mut files)?;
    files.sort();
    Ok(files)
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let artifacts = Artifacts::under(&config.output_dir);
        Pipeline { config, artifacts }
    }

    fn tokenizer(&self) -> Result<Tokenizer> {
        match &self.config.stopwords {
            Some(path) => Ok(Tokenizer::from_path(path)?),
            None => Ok(Tokenizer::bundled()),
        }
    }

    fn lexicon(&self) -> Result<CreationLexicon> {
        match &self.config.creation_verbs {
            Some(path) => Ok(CreationLexicon::from_path(path)?),
            None => Ok(CreationLexicon::bundled()),
        }
    }

    fn load_graph(&self, stage: &str) -> Result<KnowHowGraph> {
        require(stage, &self.artifacts.graph, "extract")?;
        let bytes = std::fs::read(&self.artifacts.graph)?;
        Ok(graph::parse(&bytes, RdfFormat::NTriples)?)
    }

    fn load_index(&self, stage: &str) -> Result<InvertedIndex> {
        require(stage, &self.artifacts.index, "index")?;
        let bytes = std::fs::read(&self.artifacts.index)?;
        Ok(InvertedIndex::from_bytes(&bytes)?)
    }

    fn load_canonical_docs(&self, stage: &str) -> Result<Vec<HowToDocument>> {
        require(stage, &self.artifacts.canonical_dir, "ingest")?;
        let files = sorted_files(&self.artifacts.canonical_dir, &[".howto.json"])?;
        let mut docs = Vec::with_capacity(files.len());
        for file in files {
            let bytes =
                std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            docs.push(
                parse_canonical(&bytes).with_context(|| format!("parsing {}", file.display()))?,
            );
        }
        Ok(docs)
    }

    /// Normalize every raw source in the corpus directory into the canonical
    /// format. Pages the adapters cannot read with confidence are skipped
    /// whole and logged.
    pub fn ingest(&self) -> Result<()> {
        let files = sorted_files(&self.config.corpus_dir, &[".howto.json", ".html", ".htm"])?;
        if files.is_empty() {
            bail!(
                "stage ingest: corpus directory {} holds no .howto.json or .html documents",
                self.config.corpus_dir.display()
            );
        }

        let parsed: Vec<(PathBuf, Result<HowToDocument, IngestError>)> =
            par_map(files, self.config.workers, |path| {
                let result = std::fs::read(path)
                    .map_err(|e| IngestError::Schema(e.to_string()))
                    .and_then(|bytes| {
                        if path.extension().is_some_and(|e| e == "html" || e == "htm") {
                            parse_wikihow_markup(&bytes)
                        } else {
                            parse_canonical(&bytes)
                        }
                    });
                (path.clone(), result)
            });

        std::fs::create_dir_all(&self.artifacts.canonical_dir)?;
        let mut seen_ids = BTreeSet::new();
        let mut skipped = Vec::new();
        let mut kept = 0usize;
        for (path, result) in parsed {
            let file_name = path
                .strip_prefix(&self.config.corpus_dir)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            match result {
                Ok(doc) => {
                    if !seen_ids.insert(doc.doc_id.clone()) {
                        bail!(
                            "stage ingest: duplicate document id {:?} from {file_name}",
                            doc.doc_id
                        );
                    }
                    let out_name = format!("{}.howto.json", doc.doc_id.replace('/', "__"));
                    write_atomic(
                        &self.artifacts.canonical_dir.join(out_name),
                        serialize_canonical(&doc).as_bytes(),
                    )?;
                    kept += 1;
                }
                Err(e) => {
                    eprintln!("ingest: skipping {file_name}: {e}");
                    skipped.push((file_name, e.to_string()));
                }
            }
        }
        skipped.sort();
        let mut log = String::from("file\treason\n");
        for (file, reason) in &skipped {
            log.push_str(&format!("{file}\t{}\n", reason.replace(['\t', '\n'], " ")));
        }
        write_atomic(&self.artifacts.ingest_skipped, log.as_bytes())?;
        println!(
            "ingest: {kept} documents normalized, {} skipped",
            skipped.len()
        );
        Ok(())
    }

    /// Extract every canonical document into the corpus graph.
    pub fn extract(&self) -> Result<()> {
        let docs = self.load_canonical_docs("extract")?;
        let (graph, mut report) = extract_corpus(&docs, &self.config.base_namespace)?;

        // Fold ingest-time skips into the report so stats sees everything.
        if self.artifacts.ingest_skipped.exists() {
            let text = std::fs::read_to_string(&self.artifacts.ingest_skipped)?;
            for line in text.lines().skip(1) {
                if let Some((file, reason)) = line.split_once('\t') {
                    report
                        .documents
                        .push(ExtractionReport::skipped(file, reason));
                }
            }
        }
        report.documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

        write_atomic(
            &self.artifacts.graph,
            graph::serialize(&graph, RdfFormat::NTriples).as_bytes(),
        )?;
        write_atomic(
            &self.artifacts.extraction_report,
            report_to_tsv(&report).as_bytes(),
        )?;
        println!(
            "extract: {} entities, {} relations from {} documents",
            graph.entity_count(),
            graph.relation_count(),
            docs.len()
        );
        Ok(())
    }

    fn lookup_backend(&self) -> Result<Box<dyn LookupBackend>> {
        if let Some(endpoint) = &self.config.lookup_endpoint {
            return Ok(Box::new(RemoteLookup::new(RemoteLookupConfig {
                endpoint: endpoint.clone(),
                timeout: Duration::from_millis(self.config.lookup_timeout_ms),
                max_concurrent: self.config.lookup_max_concurrent,
                retries: self.config.lookup_retries,
            })));
        }
        let path = self.config.catalog.as_ref().ok_or_else(|| {
            anyhow!("stage link-entities: no catalog or lookup endpoint configured")
        })?;
        Ok(Box::new(Catalog::from_path(path)?))
    }

    /// Link process inputs and outputs to the entity catalog and compose
    /// producer→consumer links.
    pub fn link_entities(&self) -> Result<()> {
        let graph = self.load_graph("link-entities")?;
        let backend = self.lookup_backend()?;
        let outcome = link_corpus(
            &graph,
            backend.as_ref(),
            &self.lexicon()?,
            &self.tokenizer()?,
            &LinkerConfig {
                tau: self.config.tau,
                max_hits: self.config.max_hits,
            },
        );
        for (label, error) in &outcome.failures {
            eprintln!("link-entities: lookup failed for {label:?}: {error}");
        }
        let io = compose_io_links(&outcome.links);
        write_atomic(
            &self.artifacts.entity_links,
            prohow::link::entity_links_to_tsv(&outcome.links).as_bytes(),
        )?;
        write_atomic(
            &self.artifacts.io_links,
            prohow::link::io_links_to_tsv(&io).as_bytes(),
        )?;
        println!(
            "link-entities: {} entity links, {} composed I/O links, {} lookup failures",
            outcome.links.len(),
            io.len(),
            outcome.failures.len()
        );
        Ok(())
    }

    /// Build the inverted index over primitive entities.
    pub fn index(&self) -> Result<()> {
        let graph = self.load_graph("index")?;
        let index = build_index(&graph, &self.tokenizer()?);
        write_atomic(&self.artifacts.index, &index.to_bytes())?;
        println!(
            "index: {} primitive entities, {} terms",
            index.doc_count(),
            index.terms().count()
        );
        Ok(())
    }

    fn hyperparams(&self) -> ForestHyperparams {
        ForestHyperparams {
            n_trees: self.config.trees,
            max_depth: (self.config.max_depth > 0).then_some(self.config.max_depth),
            min_leaf: self.config.min_leaf,
            features_per_split: None,
        }
    }

    /// Train the link classifier on the labeled-pairs file and report its
    /// cross-validated quality.
    pub fn train(&self) -> Result<()> {
        let labels_path = self.config.labels.as_ref().ok_or_else(|| {
            anyhow!("stage train: config key `labels` (labeled-pairs file) is not set")
        })?;
        let graph = self.load_graph("train")?;
        let index = self.load_index("train")?;
        let tokenizer = self.tokenizer()?;
        let schema = FeatureSchema::default_v1();

        let pairs = labeled_pairs_from_tsv(&std::fs::read_to_string(labels_path)?)?;
        if pairs.is_empty() {
            bail!(
                "stage train: labeled-pairs file {} is empty",
                labels_path.display()
            );
        }
        let samples = featurize_labeled_pairs(&graph, &index, &pairs, &schema, &tokenizer)?;

        let hyperparams = self.hyperparams();
        let model = train_forest(&samples, &schema, &hyperparams, self.config.seed)?;
        write_atomic(&self.artifacts.forest, model.to_json().as_bytes())?;

        let mut cv_out = String::from("fold\tprecision\trecall\taccuracy\n");
        if samples.len() >= self.config.cv_folds {
            let metrics = cross_validate(
                &samples,
                self.config.cv_folds,
                &schema,
                &hyperparams,
                self.config.seed,
            )?;
            for (i, fold) in metrics.folds.iter().enumerate() {
                cv_out.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    i + 1,
                    fold.precision,
                    fold.recall,
                    fold.accuracy
                ));
            }
            cv_out.push_str(&format!(
                "mean\t{}\t{}\t{}\n",
                metrics.mean_precision, metrics.mean_recall, metrics.mean_accuracy
            ));
            println!(
                "train: {} samples, {}-fold CV mean precision {:.3}",
                samples.len(),
                self.config.cv_folds,
                metrics.mean_precision
            );
        } else {
            println!(
                "train: {} samples (too few for {}-fold cross validation)",
                samples.len(),
                self.config.cv_folds
            );
        }
        write_atomic(&self.artifacts.cv_metrics, cv_out.as_bytes())?;
        Ok(())
    }

    /// Classify candidates for every complex process and keep the accepted
    /// links.
    pub fn link_decomposition(&self) -> Result<()> {
        let graph = self.load_graph("link-decomposition")?;
        let index = self.load_index("link-decomposition")?;
        require("link-decomposition", &self.artifacts.forest, "train")?;
        let model = ForestModel::from_json(&std::fs::read_to_string(&self.artifacts.forest)?)?;
        let links = generate_links(
            &graph,
            &index,
            &model,
            &self.tokenizer()?,
            self.config.index_k,
            self.config.decision_threshold,
        )?;
        write_atomic(
            &self.artifacts.decomposition_links,
            decompose::links_to_tsv(&links).as_bytes(),
        )?;
        println!("link-decomposition: {} links accepted", links.len());
        Ok(())
    }

    /// Compare machine links against the corpus's user-authored cross
    /// references on precision, count, and coverage.
    pub fn evaluate(&self) -> Result<()> {
        let graph = self.load_graph("evaluate")?;
        let docs = self.load_canonical_docs("evaluate")?;
        require("evaluate", &self.artifacts.io_links, "link-entities")?;
        require(
            "evaluate",
            &self.artifacts.decomposition_links,
            "link-decomposition",
        )?;

        let processes = main_processes(&graph);
        let denominator = processes.len();

        // Machine link sets.
        let io_links = read_io_links(&self.artifacts.io_links)?;
        let decomposition_links = decompose::links_from_tsv(&std::fs::read_to_string(
            &self.artifacts.decomposition_links,
        )?)?;

        // Coverage sources: the consumer process of an I/O link carries the
        // reference role; a decomposition link originates at its primitive.
        let io_sources: BTreeSet<EntityUri> = io_links.iter().map(|l| l.consumer.clone()).collect();
        let decomposition_sources: BTreeSet<EntityUri> = decomposition_links
            .iter()
            .map(|l| l.primitive.clone())
            .collect();

        let io_ids: BTreeSet<String> = io_links
            .iter()
            .map(|l| format!("{}|{}|{}", l.producer, l.consumer, l.via))
            .collect();
        let decomposition_ids: BTreeSet<String> = decomposition_links
            .iter()
            .map(|l| format!("{}|{}", l.primitive, l.complex))
            .collect();

        let machine_io = self.metrics(
            LinkType::Io,
            io_links.len(),
            &io_sources,
            &processes,
            &graph,
            self.config.judgments_io.as_deref(),
            &io_ids,
        )?;
        let mut machine_decomposition = self.metrics(
            LinkType::Decomposition,
            decomposition_links.len(),
            &decomposition_sources,
            &processes,
            &graph,
            self.config.judgments_decomposition.as_deref(),
            &decomposition_ids,
        )?;
        if machine_decomposition.precision.is_none() {
            // Without judgments the classifier's cross-validated precision
            // stands in for the decomposition link set.
            machine_decomposition.precision = read_cv_mean_precision(&self.artifacts.cv_metrics)?;
        }
        let machine_union = covered_processes(&io_sources, &processes, &graph)
            .union(&covered_processes(
                &decomposition_sources,
                &processes,
                &graph,
            ))
            .cloned()
            .collect::<BTreeSet<_>>()
            .len();
        let machine_total = aggregate_total(&machine_io, &machine_decomposition, machine_union);

        // Community link sets from the documents' own cross references.
        let (community_io, community_decomposition) =
            extract_community_links(&docs, &self.config.base_namespace);
        let community_io_sources: BTreeSet<EntityUri> =
            community_io.iter().map(|l| l.source.clone()).collect();
        let community_decomposition_sources: BTreeSet<EntityUri> = community_decomposition
            .iter()
            .map(|l| l.source.clone())
            .collect();
        let community_io_report = MetricsReport {
            link_type: LinkType::Io,
            precision: None,
            judged: 0,
            correct: 0,
            link_count: community_io.len(),
            covered_processes: coverage(&community_io_sources, &processes, &graph).0,
            denominator,
        };
        let community_decomposition_report = MetricsReport {
            link_type: LinkType::Decomposition,
            precision: None,
            judged: 0,
            correct: 0,
            link_count: community_decomposition.len(),
            covered_processes: coverage(&community_decomposition_sources, &processes, &graph).0,
            denominator,
        };
        let community_union = covered_processes(&community_io_sources, &processes, &graph)
            .union(&covered_processes(
                &community_decomposition_sources,
                &processes,
                &graph,
            ))
            .cloned()
            .collect::<BTreeSet<_>>()
            .len();
        let community_total = aggregate_total(
            &community_io_report,
            &community_decomposition_report,
            community_union,
        );

        let columns = vec![
            (
                "community".to_string(),
                vec![
                    community_io_report,
                    community_decomposition_report,
                    community_total,
                ],
            ),
            (
                "machine".to_string(),
                vec![machine_io, machine_decomposition, machine_total],
            ),
        ];
        let table = compare(&columns);
        write_atomic(&self.artifacts.report_text, table.as_bytes())?;
        write_atomic(&self.artifacts.report_tsv, compare_tsv(&columns).as_bytes())?;
        print!("{table}");
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn metrics(
        &self,
        link_type: LinkType,
        link_count: usize,
        sources: &BTreeSet<EntityUri>,
        processes: &[EntityUri],
        graph: &KnowHowGraph,
        judgments_path: Option<&Path>,
        link_ids: &BTreeSet<String>,
    ) -> Result<MetricsReport> {
        let (precision_value, judged, correct) = match judgments_path {
            Some(path) => {
                let judgments = GoldJudgments::from_tsv(&std::fs::read_to_string(path)?)?;
                judgments.validate_against(link_ids)?;
                let p = precision(&judgments)?;
                (Some(p), judgments.len(), judgments.correct_count())
            }
            None => (None, 0, 0),
        };
        Ok(MetricsReport {
            link_type,
            precision: precision_value,
            judged,
            correct,
            link_count,
            covered_processes: coverage(sources, processes, graph).0,
            denominator: processes.len(),
        })
    }

    /// Aggregate the extraction report into corpus totals.
    pub fn stats(&self) -> Result<String> {
        require("stats", &self.artifacts.extraction_report, "extract")?;
        let report = report_from_tsv(&std::fs::read_to_string(&self.artifacts.extraction_report)?)
            .map_err(|e| anyhow!("stage stats: {e}"))?;
        let extracted = report
            .documents
            .iter()
            .filter(|d| d.skipped.is_none())
            .count();
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28}{}\n",
            "Number of main processes",
            prohow::util::text::group_thousands(extracted as u64)
        ));
        out.push_str(&format!(
            "{:<28}{}\n",
            "Total number of entities",
            prohow::util::text::group_thousands(report.total_entities() as u64)
        ));
        for property in [Property::HasStep, Property::HasMethod, Property::Requires] {
            out.push_str(&format!(
                "{:<28}{}\n",
                format!("Relations: {}", property.name()),
                prohow::util::text::group_thousands(report.total_of(property) as u64)
            ));
        }
        out.push_str(&format!(
            "{:<28}{}\n",
            "Skipped documents",
            report.skipped_count()
        ));
        Ok(out)
    }

    /// The whole workflow in stage order.
    pub fn run_all(&self) -> Result<()> {
        self.ingest().context("stage `ingest` failed")?;
        self.extract().context("stage `extract` failed")?;
        self.link_entities()
            .context("stage `link-entities` failed")?;
        self.index().context("stage `index` failed")?;
        self.train().context("stage `train` failed")?;
        self.link_decomposition()
            .context("stage `link-decomposition` failed")?;
        self.evaluate().context("stage `evaluate` failed")?;
        print!("{}", self.stats().context("stage `stats` failed")?);
        Ok(())
    }
}

fn read_io_links(path: &Path) -> Result<Vec<IoLink>> {
    let mut links = Vec::new();
    for (idx, line) in std::fs::read_to_string(path)?.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            bail!("io-links line {}: expected 3 fields", idx + 1);
        }
        links.push(IoLink {
            producer: EntityUri::parse(fields[0])?,
            consumer: EntityUri::parse(fields[1])?,
            via: fields[2].to_string(),
        });
    }
    Ok(links)
}

fn read_cv_mean_precision(path: &Path) -> Result<Option<f64>> {
    if !path.exists() {
        return Ok(None);
    }
    for line in std::fs::read_to_string(path)?.lines() {
        if let Some(rest) = line.strip_prefix("mean\t") {
            let precision = rest
                .split('\t')
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| anyhow!("malformed cv-metrics mean row"))?;
            return Ok(Some(precision));
        }
    }
    Ok(None)
}
