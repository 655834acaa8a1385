//! Best-effort adapter for archived wikiHow-style instruction pages.
//!
//! Structure is extracted only where the markup states it explicitly: an
//! `<h1>` title, heading-introduced step lists (`<ol>` ordered, `<ul>`
//! unordered under a Steps heading), a "Things You'll Need" or "Ingredients"
//! list for requirements, and a breadcrumb list for categories. Pages
//! without a title or without any step list are skipped whole.

use super::html::{self, Element};
use super::{
    HowToDocument, IngestError, MethodBlock, Requirement, SourceText, StepBlock, Violation,
};
use crate::graph::Selector;
use crate::util::text::normalize_ws;

pub fn parse_wikihow_markup(page: &[u8]) -> Result<HowToDocument, IngestError> {
    let text = std::str::from_utf8(page).map_err(|_| IngestError::Encoding)?;
    let root = html::parse(text);

    let title_el = root
        .first("h1")
        .ok_or_else(|| IngestError::UnrecognizedLayout("page has no <h1> title".into()))?;
    let title = SourceText::new(title_el.text());
    if title.text.is_empty() {
        return Err(IngestError::UnrecognizedLayout(
            "page title is empty".into(),
        ));
    }
    let doc_id = format!("wikihow/{}", slugify(&title.text));

    let categories = breadcrumb_categories(&root);

    let mut sections = Vec::new();
    collect_sections(&root, &mut Section::default(), &mut sections);

    let mut requirement_items: Vec<(SourceText, Option<String>, (usize, usize))> = Vec::new();
    let mut raw_methods: Vec<(Option<String>, bool, Vec<RawStep>)> = Vec::new();

    for section in &sections {
        let heading = section.heading.as_deref().unwrap_or("");
        let is_requirements = heading.to_lowercase().contains("things you'll need")
            || heading.to_lowercase().contains("ingredients");
        for list in &section.lists {
            if is_requirements {
                for item in list.element.child_elements().filter(|el| el.name == "li") {
                    let text = SourceText::new(item.text());
                    if text.text.is_empty() {
                        return Err(IngestError::UnrecognizedLayout(
                            "requirement list contains an empty item".into(),
                        ));
                    }
                    let span = item.text_span().unwrap_or((0, 0));
                    requirement_items.push((text, first_article_link(item), span));
                }
            } else if list.element.name == "ol" || heading.to_lowercase().contains("steps") {
                let steps = read_steps(&list.element)?;
                if steps.is_empty() {
                    continue;
                }
                raw_methods.push((method_name(heading), list.element.name == "ol", steps));
            }
        }
    }

    if raw_methods.is_empty() {
        return Err(IngestError::UnrecognizedLayout(
            "page has no step list".into(),
        ));
    }

    let requirements = requirement_items
        .into_iter()
        .enumerate()
        .map(|(i, (text, cross_ref, span))| Requirement {
            selector: Selector {
                source_doc: doc_id.clone(),
                path: format!("req/{}", i + 1),
                char_start: span.0,
                char_end: span.1,
            },
            text,
            cross_ref,
        })
        .collect::<Vec<_>>();
    // Duplicates collapse the same way the canonical parser collapses them.
    let mut seen = std::collections::BTreeSet::new();
    let mut deduped = Vec::new();
    for mut req in requirements {
        if seen.insert(req.text.text.clone()) {
            req.selector.path = format!("req/{}", deduped.len() + 1);
            deduped.push(req);
        }
    }

    let methods = raw_methods
        .into_iter()
        .enumerate()
        .map(|(j, (name, ordered, steps))| MethodBlock {
            name: name.map(SourceText::new),
            ordered,
            steps: steps
                .into_iter()
                .enumerate()
                .map(|(k, s)| finish_step(s, &doc_id, &format!("method{}/step{}", j + 1, k + 1)))
                .collect(),
        })
        .collect();

    let doc = HowToDocument {
        doc_id,
        title,
        language: "en".to_string(),
        categories,
        requirements: deduped,
        methods,
    };
    let violations = super::validate(&doc);
    if violations.is_empty() {
        Ok(doc)
    } else {
        Err(IngestError::UnrecognizedLayout(
            violations
                .iter()
                .map(Violation::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

#[derive(Default)]
struct Section {
    heading: Option<String>,
    lists: Vec<ListRef>,
}

struct ListRef {
    element: Element,
}

/// Walk the tree in document order, splitting content at h2/h3 headings.
fn collect_sections(el: &Element, current: &mut Section, out: &mut Vec<Section>) {
    for child in el.child_elements() {
        match child.name.as_str() {
            "h2" | "h3" => {
                if current.heading.is_some() || !current.lists.is_empty() {
                    out.push(std::mem::take(current));
                }
                current.heading = Some(normalize_ws(&child.text()));
            }
            "ol" | "ul" => {
                if child.attr("id") != Some("breadcrumb") {
                    current.lists.push(ListRef {
                        element: child.clone(),
                    });
                }
            }
            _ => collect_sections(child, current, out),
        }
    }
    if el.name == "#root" && (current.heading.is_some() || !current.lists.is_empty()) {
        out.push(std::mem::take(current));
    }
}

struct RawStep {
    headline: SourceText,
    detail: Option<SourceText>,
    substeps: Vec<RawStep>,
    cross_ref: Option<String>,
    span: (usize, usize),
}

fn read_steps(list: &Element) -> Result<Vec<RawStep>, IngestError> {
    let mut steps = Vec::new();
    for item in list.child_elements().filter(|el| el.name == "li") {
        steps.push(read_step(item)?);
    }
    Ok(steps)
}

/// One `<li>`: a bold run opens the headline and the rest of the text is the
/// detail; without bold markup the whole text is the headline. A nested list
/// holds the substeps.
fn read_step(item: &Element) -> Result<RawStep, IngestError> {
    let mut headline = String::new();
    let mut detail = String::new();
    let mut saw_bold = false;
    let mut substeps = Vec::new();

    for child in &item.children {
        match child {
            html::Node::Text { text, .. } => {
                if saw_bold {
                    detail.push_str(text);
                } else {
                    headline.push_str(text);
                }
            }
            html::Node::Element(el) => match el.name.as_str() {
                "b" | "strong" if !saw_bold => {
                    saw_bold = true;
                    headline = el.text();
                }
                "ol" | "ul" => {
                    substeps.extend(read_steps(el)?);
                }
                _ => {
                    let text = el.text();
                    if saw_bold {
                        detail.push_str(&text);
                    } else {
                        headline.push_str(&text);
                    }
                }
            },
        }
    }

    let headline = SourceText::new(headline);
    if headline.text.is_empty() {
        return Err(IngestError::UnrecognizedLayout(
            "step item has no text".into(),
        ));
    }
    let detail = SourceText::new(detail);
    Ok(RawStep {
        headline,
        detail: if detail.text.is_empty() {
            None
        } else {
            Some(detail)
        },
        substeps,
        cross_ref: first_article_link(item),
        span: item.text_span().unwrap_or((0, 0)),
    })
}

fn finish_step(raw: RawStep, doc_id: &str, path: &str) -> StepBlock {
    StepBlock {
        headline: raw.headline,
        detail: raw.detail,
        substeps: raw
            .substeps
            .into_iter()
            .enumerate()
            .map(|(i, s)| finish_step(s, doc_id, &format!("{path}/step{}", i + 1)))
            .collect(),
        cross_ref: raw.cross_ref,
        selector: Selector {
            source_doc: doc_id.to_string(),
            path: path.to_string(),
            char_start: raw.span.0,
            char_end: raw.span.1,
        },
    }
}

fn breadcrumb_categories(root: &Element) -> Vec<String> {
    let mut lists = Vec::new();
    root.find_all("ul", &mut lists);
    let Some(breadcrumb) = lists
        .into_iter()
        .find(|el| el.attr("id") == Some("breadcrumb"))
    else {
        return Vec::new();
    };
    let mut anchors = Vec::new();
    breadcrumb.find_all("a", &mut anchors);
    let mut out = Vec::new();
    for a in anchors {
        let text = normalize_ws(&a.text());
        if !text.is_empty() && text != "Home" && !out.contains(&text) {
            out.push(text);
        }
    }
    out
}

/// First in-site article link inside an element, as a document id.
fn first_article_link(el: &Element) -> Option<String> {
    let mut anchors = Vec::new();
    el.find_all("a", &mut anchors);
    for a in anchors {
        if let Some(href) = a.attr("href") {
            if let Some(slug) = href.strip_prefix('/') {
                let slug = slug.split(['?', '#']).next().unwrap_or("");
                if !slug.is_empty() && !slug.contains('/') {
                    return Some(format!("wikihow/{slug}"));
                }
            }
        }
    }
    None
}

/// Heading text to method name. The generic "Steps" heading and empty
/// headings yield unnamed methods; a "Method N of M:" prefix is dropped.
fn method_name(heading: &str) -> Option<String> {
    let text = normalize_ws(heading);
    if text.is_empty() || text.eq_ignore_ascii_case("steps") {
        return None;
    }
    let text = match text.to_lowercase().starts_with("method ") {
        true => match text.split_once(':') {
            Some((_, rest)) => normalize_ws(rest),
            None => text,
        },
        false => text,
    };
    if text.is_empty() || text.eq_ignore_ascii_case("steps") {
        None
    } else {
        Some(text)
    }
}

fn slugify(title: &str) -> String {
    let mut out = String::new();
    let mut dash_pending = false;
    for ch in title.chars() {
        if ch.is_alphanumeric() {
            if dash_pending && !out.is_empty() {
                out.push('-');
            }
            dash_pending = false;
            out.push(ch);
        } else {
            dash_pending = true;
        }
    }
    if out.is_empty() {
        "Untitled".to_string()
    } else {
        out
    }
}
