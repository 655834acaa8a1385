//! Canonical how-to document schema and adapters that normalize raw sources
//! into it. Adapters either produce a document that passes [`validate`] or
//! refuse the whole page; nothing partially-extracted leaks downstream.

pub mod canonical;
mod html;
pub mod wikihow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Selector;
use crate::util::text::normalize_ws;

pub use canonical::{parse_canonical, parse_canonical_with, serialize_canonical};
pub use wikihow::parse_wikihow_markup;

/// Nesting limit for substeps. A document with deeper structure is rejected.
pub const DEFAULT_MAX_DEPTH: usize = 4;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("document is not valid UTF-8")]
    Encoding,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unrecognized layout: {0}")]
    UnrecognizedLayout(String),
}

/// A text field with both its source form and the whitespace-normalized form
/// used as an entity label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceText {
    pub raw: String,
    pub text: String,
}

impl SourceText {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let text = normalize_ws(&raw);
        SourceText { raw, text }
    }

    pub fn char_len(&self) -> usize {
        self.raw.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HowToDocument {
    /// Repository name plus document slug, e.g. `wikihow/Make-a-Pancake`.
    pub doc_id: String,
    pub title: SourceText,
    /// BCP-47 language tag.
    pub language: String,
    pub categories: Vec<String>,
    pub requirements: Vec<Requirement>,
    pub methods: Vec<MethodBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub text: SourceText,
    /// Optional user-authored cross reference to another document.
    pub cross_ref: Option<String>,
    pub selector: Selector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodBlock {
    pub name: Option<SourceText>,
    /// False when the source presents the steps as an unordered collection;
    /// suppresses ordering edges downstream.
    pub ordered: bool,
    pub steps: Vec<StepBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepBlock {
    pub headline: SourceText,
    pub detail: Option<SourceText>,
    pub substeps: Vec<StepBlock>,
    /// Optional user-authored cross reference to another document.
    pub cross_ref: Option<String>,
    pub selector: Selector,
}

impl HowToDocument {
    pub fn step_count(&self) -> usize {
        fn count(steps: &[StepBlock]) -> usize {
            steps.iter().map(|s| 1 + count(&s.substeps)).sum()
        }
        self.methods.iter().map(|m| count(&m.steps)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyDocId,
    InvalidDocId { reason: String },
    EmptyTitle,
    NoMethods,
    EmptyMethod { method: usize },
    EmptyHeadline { path: String },
    DepthExceeded { path: String, depth: usize },
    EmptyRequirement { index: usize },
    DuplicateRequirement { text: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptyDocId => write!(f, "doc_id is empty"),
            Violation::InvalidDocId { reason } => write!(f, "invalid doc_id: {reason}"),
            Violation::EmptyTitle => write!(f, "title is empty"),
            Violation::NoMethods => write!(f, "document has no methods"),
            Violation::EmptyMethod { method } => write!(f, "method {method} has no steps"),
            Violation::EmptyHeadline { path } => write!(f, "step {path} has an empty headline"),
            Violation::DepthExceeded { path, depth } => {
                write!(f, "step {path} nested at depth {depth}")
            }
            Violation::EmptyRequirement { index } => write!(f, "requirement {index} is empty"),
            Violation::DuplicateRequirement { text } => {
                write!(f, "duplicate requirement {text:?}")
            }
        }
    }
}

/// Check every schema invariant; empty result means the document is valid.
pub fn validate(doc: &HowToDocument) -> Vec<Violation> {
    validate_with(doc, DEFAULT_MAX_DEPTH)
}

pub fn validate_with(doc: &HowToDocument, max_depth: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if doc.doc_id.is_empty() {
        out.push(Violation::EmptyDocId);
    } else if let Err(e) =
        crate::graph::mint_uri(crate::graph::vocab::DEFAULT_DATA_NS, &doc.doc_id, "main")
    {
        out.push(Violation::InvalidDocId {
            reason: e.to_string(),
        });
    }
    if doc.title.text.is_empty() {
        out.push(Violation::EmptyTitle);
    }
    if doc.methods.is_empty() {
        out.push(Violation::NoMethods);
    }
    for (j, method) in doc.methods.iter().enumerate() {
        if method.steps.is_empty() {
            out.push(Violation::EmptyMethod { method: j + 1 });
        }
        for (k, step) in method.steps.iter().enumerate() {
            check_step(
                step,
                &format!("method{}/step{}", j + 1, k + 1),
                1,
                max_depth,
                &mut out,
            );
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for (i, req) in doc.requirements.iter().enumerate() {
        if req.text.text.is_empty() {
            out.push(Violation::EmptyRequirement { index: i + 1 });
        } else if !seen.insert(req.text.text.clone()) {
            out.push(Violation::DuplicateRequirement {
                text: req.text.text.clone(),
            });
        }
    }
    out
}

fn check_step(
    step: &StepBlock,
    path: &str,
    depth: usize,
    max_depth: usize,
    out: &mut Vec<Violation>,
) {
    if step.headline.text.is_empty() {
        out.push(Violation::EmptyHeadline {
            path: path.to_string(),
        });
    }
    if depth > max_depth {
        out.push(Violation::DepthExceeded {
            path: path.to_string(),
            depth,
        });
        return; // one violation per runaway branch is enough
    }
    for (i, sub) in step.substeps.iter().enumerate() {
        check_step(
            sub,
            &format!("{path}/step{}", i + 1),
            depth + 1,
            max_depth,
            out,
        );
    }
}
