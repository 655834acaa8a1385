//! Link-quality metrics: precision over judged samples, link counts, and
//! coverage (how many main processes carry at least one link somewhere in
//! their decomposition tree), plus side-by-side comparison tables.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{EntityKind, EntityUri, KnowHowGraph, Property, TriplePattern};
use crate::ingest::HowToDocument;
use crate::util::text::group_thousands;
use crate::util::SplitMix64;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot sample {wanted} of {have} links")]
    SampleTooLarge { wanted: usize, have: usize },
    #[error("no judgments to score")]
    EmptyJudgments,
    #[error("judgment references unknown link id {id:?}")]
    DanglingJudgment { id: String },
    #[error("judgments file error: {message}")]
    Format { message: String },
}

/// Human link judgments keyed by link id, read from a file, never collected
/// interactively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldJudgments {
    judgments: BTreeMap<String, bool>,
}

impl GoldJudgments {
    pub fn new(judgments: BTreeMap<String, bool>) -> Self {
        GoldJudgments { judgments }
    }

    /// Rows of `link id <TAB> 0|1`.
    pub fn from_tsv(text: &str) -> Result<Self, EvalError> {
        let mut judgments = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((id, verdict)) = line.rsplit_once('\t') else {
                return Err(EvalError::Format {
                    message: format!("line {}: expected 2 fields", idx + 1),
                });
            };
            let correct = match verdict {
                "0" => false,
                "1" => true,
                other => {
                    return Err(EvalError::Format {
                        message: format!("line {}: bad verdict {other:?}", idx + 1),
                    })
                }
            };
            judgments.insert(id.to_string(), correct);
        }
        Ok(GoldJudgments { judgments })
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn correct_count(&self) -> usize {
        self.judgments.values().filter(|v| **v).count()
    }

    /// Every judged id must exist in the evaluated link set; dangling ids
    /// are a hard error, never skipped.
    pub fn validate_against(&self, link_ids: &BTreeSet<String>) -> Result<(), EvalError> {
        for id in self.judgments.keys() {
            if !link_ids.contains(id) {
                return Err(EvalError::DanglingJudgment { id: id.clone() });
            }
        }
        Ok(())
    }
}

/// Uniform sample of link ids without replacement, seeded and deterministic.
pub fn sample_links(ids: &[String], n: usize, seed: u64) -> Result<Vec<String>, EvalError> {
    if n > ids.len() {
        return Err(EvalError::SampleTooLarge {
            wanted: n,
            have: ids.len(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let picks = rng.sample_indices(ids.len(), n);
    Ok(picks.into_iter().map(|i| ids[i].clone()).collect())
}

/// Fraction of judged links that are correct.
pub fn precision(judgments: &GoldJudgments) -> Result<f64, EvalError> {
    if judgments.is_empty() {
        return Err(EvalError::EmptyJudgments);
    }
    Ok(judgments.correct_count() as f64 / judgments.len() as f64)
}

/// Exact percentage with one decimal place, computed in integer arithmetic
/// (round half up on the tenths digit).
pub fn percent_1dp(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        return 0.0;
    }
    let tenths = (numerator as u128 * 2000 + denominator as u128) / (2 * denominator as u128);
    tenths as f64 / 10.0
}

/// Entities reachable from a main task inside its own document: the task
/// itself plus everything connected through the three core properties.
fn decomposition_tree(graph: &KnowHowGraph, task: &EntityUri) -> BTreeSet<EntityUri> {
    let source_doc = match graph.entity(task) {
        Some(e) => e.source_doc.clone(),
        None => return BTreeSet::new(),
    };
    let mut seen = BTreeSet::from([task.clone()]);
    let mut queue = VecDeque::from([task.clone()]);
    while let Some(current) = queue.pop_front() {
        for rel in graph.query(&TriplePattern {
            subject: Some(&current),
            property: None,
            object: None,
        }) {
            let next = rel.object;
            let same_doc = graph
                .entity(&next)
                .is_some_and(|e| e.source_doc == source_doc);
            if same_doc && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// A main process is covered when any entity of its decomposition tree is
/// the source side of at least one link.
pub fn coverage(
    link_sources: &BTreeSet<EntityUri>,
    processes: &[EntityUri],
    graph: &KnowHowGraph,
) -> (usize, f64) {
    let covered = covered_processes(link_sources, processes, graph).len();
    let ratio = if processes.is_empty() {
        0.0
    } else {
        covered as f64 / processes.len() as f64
    };
    (covered, ratio)
}

pub fn covered_processes(
    link_sources: &BTreeSet<EntityUri>,
    processes: &[EntityUri],
    graph: &KnowHowGraph,
) -> BTreeSet<EntityUri> {
    let mut covered = BTreeSet::new();
    for process in processes {
        let tree = decomposition_tree(graph, process);
        if tree.iter().any(|uri| link_sources.contains(uri)) {
            covered.insert(process.clone());
        }
    }
    covered
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkType {
    Io,
    Decomposition,
    Total,
}

impl LinkType {
    pub fn label(self) -> &'static str {
        match self {
            LinkType::Io => "I/O links",
            LinkType::Decomposition => "decomposition links",
            LinkType::Total => "the links",
        }
    }
}

/// One measured link set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub link_type: LinkType,
    /// `None` when no judgments were supplied for this set.
    pub precision: Option<f64>,
    pub judged: usize,
    pub correct: usize,
    pub link_count: usize,
    pub covered_processes: usize,
    pub denominator: usize,
}

impl MetricsReport {
    pub fn coverage_percent(&self) -> f64 {
        percent_1dp(self.covered_processes as u64, self.denominator as u64)
    }
}

/// Totals row: counts add up, coverage counts the union of covered
/// processes, and precision is the judgment-weighted aggregate.
pub fn aggregate_total(
    io: &MetricsReport,
    decomposition: &MetricsReport,
    covered_union: usize,
) -> MetricsReport {
    let judged = io.judged + decomposition.judged;
    let correct = io.correct + decomposition.correct;
    MetricsReport {
        link_type: LinkType::Total,
        precision: (judged > 0).then(|| correct as f64 / judged as f64),
        judged,
        correct,
        link_count: io.link_count + decomposition.link_count,
        covered_processes: covered_union,
        denominator: io.denominator.max(decomposition.denominator),
    }
}

/// Side-by-side comparison of named columns, one row triple per link type.
pub fn compare(columns: &[(String, Vec<MetricsReport>)]) -> String {
    assert!(columns.len() >= 2, "compare needs at least two columns");
    let metric_rows: Vec<(LinkType, &str)> = vec![
        (LinkType::Io, "Precision of I/O links"),
        (LinkType::Io, "Number of I/O links"),
        (LinkType::Io, "Coverage of I/O links"),
        (LinkType::Decomposition, "Precision of decomposition links"),
        (LinkType::Decomposition, "Number of decomposition links"),
        (LinkType::Decomposition, "Coverage of decomposition links"),
        (LinkType::Total, "Total precision of the links"),
        (LinkType::Total, "Total number of links"),
        (LinkType::Total, "Total coverage of the links"),
    ];

    let cell = |report: Option<&MetricsReport>, row: usize| -> String {
        let Some(report) = report else {
            return "-".to_string();
        };
        match row % 3 {
            0 => match report.precision {
                Some(p) => format!("{:.1}%", p * 100.0),
                None => "-".to_string(),
            },
            1 => group_thousands(report.link_count as u64),
            _ => format!(
                "{} ({}%)",
                group_thousands(report.covered_processes as u64),
                report.coverage_percent()
            ),
        }
    };

    let mut table: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    table.push(header);
    for (row, (link_type, title)) in metric_rows.iter().enumerate() {
        let mut cells = vec![title.to_string()];
        for (_, reports) in columns {
            let report = reports.iter().find(|r| r.link_type == *link_type);
            cells.push(cell(report, row));
        }
        table.push(cells);
    }

    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| {
            table
                .iter()
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cellv)| format!("{:width$}", cellv, width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

/// Machine-readable twin of the comparison table.
pub fn compare_tsv(columns: &[(String, Vec<MetricsReport>)]) -> String {
    let mut out = String::from("column\tlink_type\tprecision\tjudged\tcorrect\tlinks\tcovered\tdenominator\tcoverage_percent\n");
    for (name, reports) in columns {
        for report in reports {
            let link_type = match report.link_type {
                LinkType::Io => "io",
                LinkType::Decomposition => "decomposition",
                LinkType::Total => "total",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                name,
                link_type,
                report
                    .precision
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| "-".into()),
                report.judged,
                report.correct,
                report.link_count,
                report.covered_processes,
                report.denominator,
                report.coverage_percent(),
            ));
        }
    }
    out
}

/// A user-authored cross reference found in a document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CommunityLink {
    /// The entity whose description carries the reference.
    pub source: EntityUri,
    /// Referenced document id.
    pub target_doc: String,
}

impl CommunityLink {
    pub fn id(&self) -> String {
        format!("{}|{}", self.source, self.target_doc)
    }
}

/// Split the user-generated cross references of a corpus into the two
/// functional groups: references on requirements play the role of I/O links,
/// references on steps play the role of decomposition links.
pub fn extract_community_links(
    docs: &[HowToDocument],
    base: &str,
) -> (Vec<CommunityLink>, Vec<CommunityLink>) {
    let mut io_role = BTreeSet::new();
    let mut decomposition_role = BTreeSet::new();
    for doc in docs {
        for requirement in &doc.requirements {
            if let Some(target) = &requirement.cross_ref {
                let source = crate::graph::mint_uri(base, &doc.doc_id, &requirement.selector.path)
                    .expect("valid documents mint");
                io_role.insert(CommunityLink {
                    source,
                    target_doc: target.clone(),
                });
            }
        }
        fn walk(
            steps: &[crate::ingest::StepBlock],
            doc_id: &str,
            base: &str,
            out: &mut BTreeSet<CommunityLink>,
        ) {
            for step in steps {
                if let Some(target) = &step.cross_ref {
                    let source = crate::graph::mint_uri(base, doc_id, &step.selector.path)
                        .expect("valid documents mint");
                    out.insert(CommunityLink {
                        source,
                        target_doc: target.clone(),
                    });
                }
                walk(&step.substeps, doc_id, base, out);
            }
        }
        for method in &doc.methods {
            walk(&method.steps, &doc.doc_id, base, &mut decomposition_role);
        }
    }
    (
        io_role.into_iter().collect(),
        decomposition_role.into_iter().collect(),
    )
}

/// Main-task URIs of a graph, the coverage denominator.
pub fn main_processes(graph: &KnowHowGraph) -> Vec<EntityUri> {
    graph
        .entities()
        .filter(|e| e.kind == EntityKind::MainTask)
        .map(|e| e.uri.clone())
        .collect()
}

/// Convenience: the `requires` objects of each step chain are ordering
/// dependencies, not content; expose the property for report breakdowns.
pub fn relation_counts(graph: &KnowHowGraph) -> BTreeMap<Property, usize> {
    let mut counts = BTreeMap::new();
    for rel in graph.relations() {
        *counts.entry(rel.property).or_insert(0) += 1;
    }
    counts
}
