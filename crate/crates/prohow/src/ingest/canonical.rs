//! The canonical interchange format: one document per UTF-8 `.howto.json`
//! file with fields `doc_id, title, language, categories[], requirements[],
//! methods[{name, ordered, steps[{headline, detail, substeps[]}]}]`.
//! Requirement entries are plain strings, or `{text, ref}` objects when the
//! source carried a cross reference; steps take an optional `ref` the same
//! way.

use serde::{Deserialize, Serialize};

use super::{
    HowToDocument, IngestError, MethodBlock, Requirement, SourceText, StepBlock, Violation,
};
use crate::graph::Selector;

#[derive(Debug, Serialize, Deserialize)]
struct DocWire {
    doc_id: String,
    title: String,
    #[serde(default = "default_language")]
    language: String,
    #[serde(default)]
    categories: Vec<String>,
    #[serde(default)]
    requirements: Vec<RequirementWire>,
    #[serde(default)]
    methods: Vec<MethodWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RequirementWire {
    Text(String),
    WithRef {
        text: String,
        #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
        cross_ref: Option<String>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct MethodWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default = "default_true")]
    ordered: bool,
    steps: Vec<StepWire>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StepWire {
    headline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    substeps: Vec<StepWire>,
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    cross_ref: Option<String>,
}

fn default_language() -> String {
    "en".to_string()
}

fn default_true() -> bool {
    true
}

pub fn parse_canonical(bytes: &[u8]) -> Result<HowToDocument, IngestError> {
    parse_canonical_with(bytes, super::DEFAULT_MAX_DEPTH)
}

pub fn parse_canonical_with(bytes: &[u8], max_depth: usize) -> Result<HowToDocument, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::Encoding)?;
    let wire: DocWire =
        serde_json::from_str(text).map_err(|e| IngestError::Schema(e.to_string()))?;
    build_document(wire, max_depth)
}

fn build_document(wire: DocWire, max_depth: usize) -> Result<HowToDocument, IngestError> {
    if !wire.language.is_empty()
        && !wire
            .language
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-')
    {
        return Err(IngestError::Schema(format!(
            "language tag {:?} is not a plausible BCP-47 tag",
            wire.language
        )));
    }
    let language = if wire.language.is_empty() {
        default_language()
    } else {
        wire.language
    };

    let mut categories = Vec::new();
    for raw in wire.categories {
        let normalized = crate::util::text::normalize_ws(&raw);
        if !normalized.is_empty() && !categories.contains(&normalized) {
            categories.push(normalized);
        }
    }

    let mut requirements: Vec<Requirement> = Vec::new();
    for (i, wire_req) in wire.requirements.into_iter().enumerate() {
        let (raw, cross_ref) = match wire_req {
            RequirementWire::Text(text) => (text, None),
            RequirementWire::WithRef { text, cross_ref } => (text, cross_ref),
        };
        let text = SourceText::new(raw);
        if text.text.is_empty() {
            return Err(IngestError::Schema(format!(
                "requirement {} is empty",
                i + 1
            )));
        }
        if requirements.iter().any(|r| r.text.text == text.text) {
            continue; // distinct after normalization
        }
        let selector = Selector {
            source_doc: wire.doc_id.clone(),
            path: format!("req/{}", requirements.len() + 1),
            char_start: 0,
            char_end: text.char_len(),
        };
        requirements.push(Requirement {
            text,
            cross_ref,
            selector,
        });
    }

    let mut methods = Vec::new();
    for (j, wire_method) in wire.methods.into_iter().enumerate() {
        let steps = wire_method
            .steps
            .into_iter()
            .enumerate()
            .map(|(k, s)| build_step(s, &wire.doc_id, &format!("method{}/step{}", j + 1, k + 1)))
            .collect();
        methods.push(MethodBlock {
            name: wire_method.name.map(SourceText::new),
            ordered: wire_method.ordered,
            steps,
        });
    }

    let doc = HowToDocument {
        doc_id: wire.doc_id,
        title: SourceText::new(wire.title),
        language,
        categories,
        requirements,
        methods,
    };
    let violations = super::validate_with(&doc, max_depth);
    if violations.is_empty() {
        Ok(doc)
    } else {
        Err(IngestError::Schema(
            violations
                .iter()
                .map(Violation::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

fn build_step(wire: StepWire, doc_id: &str, path: &str) -> StepBlock {
    let headline = SourceText::new(wire.headline);
    let selector = Selector {
        source_doc: doc_id.to_string(),
        path: path.to_string(),
        char_start: 0,
        char_end: headline.char_len(),
    };
    StepBlock {
        headline,
        detail: wire.detail.map(SourceText::new),
        substeps: wire
            .substeps
            .into_iter()
            .enumerate()
            .map(|(i, s)| build_step(s, doc_id, &format!("{path}/step{}", i + 1)))
            .collect(),
        cross_ref: wire.cross_ref,
        selector,
    }
}

/// Serialize back to the interchange format. Deterministic; round-trips
/// through [`parse_canonical`] for every valid document.
pub fn serialize_canonical(doc: &HowToDocument) -> String {
    fn step_wire(step: &StepBlock) -> StepWire {
        StepWire {
            headline: step.headline.raw.clone(),
            detail: step.detail.as_ref().map(|d| d.raw.clone()),
            substeps: step.substeps.iter().map(step_wire).collect(),
            cross_ref: step.cross_ref.clone(),
        }
    }
    let wire = DocWire {
        doc_id: doc.doc_id.clone(),
        title: doc.title.raw.clone(),
        language: doc.language.clone(),
        categories: doc.categories.clone(),
        requirements: doc
            .requirements
            .iter()
            .map(|r| match &r.cross_ref {
                None => RequirementWire::Text(r.text.raw.clone()),
                Some(_) => RequirementWire::WithRef {
                    text: r.text.raw.clone(),
                    cross_ref: r.cross_ref.clone(),
                },
            })
            .collect(),
        methods: doc
            .methods
            .iter()
            .map(|m| MethodWire {
                name: m.name.as_ref().map(|n| n.raw.clone()),
                ordered: m.ordered,
                steps: m.steps.iter().map(step_wire).collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("document serialization cannot fail");
    out.push('\n');
    out
}
