//! Entity URI minting and validation.
//!
//! Minted URIs follow `<base>/<source-doc>#<fragment>` where the fragment is
//! the document-structure path with segments joined by `-`. Re-extracting the
//! same document always yields the same URIs.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::GraphError;

/// An absolute IRI identifying one extracted entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityUri(String);

impl EntityUri {
    /// Wrap a string after checking it is a syntactically plausible absolute
    /// IRI (scheme present, no whitespace or angle-bracket characters).
    pub fn parse(value: impl Into<String>) -> Result<Self, GraphError> {
        let value = value.into();
        validate_iri(&value)?;
        Ok(EntityUri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Smallest value in the `Ord` ordering; range-scan lower bound only.
    pub(crate) fn min_bound() -> EntityUri {
        EntityUri(String::new())
    }

    /// URI of this entity's provenance annotation node.
    pub fn annotation_uri(&self) -> EntityUri {
        EntityUri(format!("{}{}", self.0, super::vocab::ANNOTATION_SUFFIX))
    }
}

impl fmt::Display for EntityUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for EntityUri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn validate_iri(value: &str) -> Result<(), GraphError> {
    let scheme_end = value.find(':').ok_or_else(|| GraphError::InvalidIri {
        iri: value.to_string(),
        reason: "missing scheme".into(),
    })?;
    let scheme = &value[..scheme_end];
    let mut chars = scheme.chars();
    let scheme_ok = match chars.next() {
        Some(first) => {
            first.is_ascii_alphabetic()
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.')
        }
        None => false,
    };
    if !scheme_ok {
        return Err(GraphError::InvalidIri {
            iri: value.to_string(),
            reason: format!("invalid scheme {scheme:?}"),
        });
    }
    for ch in value.chars() {
        if ch.is_ascii_control()
            || matches!(
                ch,
                ' ' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'
            )
        {
            return Err(GraphError::InvalidIri {
                iri: value.to_string(),
                reason: format!("character {ch:?} not allowed"),
            });
        }
    }
    if value.matches('#').count() > 1 {
        return Err(GraphError::InvalidIri {
            iri: value.to_string(),
            reason: "more than one fragment separator".into(),
        });
    }
    Ok(())
}

/// Mint the URI for the entity at `fragment_path` (slash-separated segments)
/// of `source_doc` (repo name plus document slug, e.g.
/// `wikihow/Make-a-Pancake`). Deterministic; percent-encodes reserved
/// characters.
pub fn mint_uri(
    base: &str,
    source_doc: &str,
    fragment_path: &str,
) -> Result<EntityUri, GraphError> {
    let base = base.trim_end_matches('/');
    if base.is_empty() {
        return Err(GraphError::InvalidIri {
            iri: base.to_string(),
            reason: "empty base namespace".into(),
        });
    }
    let doc_part = encode_doc_path(source_doc)?;
    let frag_part = encode_fragment_path(fragment_path)?;
    EntityUri::parse(format!("{base}/{doc_part}#{frag_part}"))
}

fn split_nonempty<'a>(path: &'a str, what: &str) -> Result<Vec<&'a str>, GraphError> {
    if path.is_empty() {
        return Err(GraphError::InvalidPath {
            path: path.to_string(),
            reason: format!("empty {what}"),
        });
    }
    let segments: Vec<&str> = path.split('/').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(GraphError::InvalidPath {
            path: path.to_string(),
            reason: format!("{what} contains an empty segment"),
        });
    }
    Ok(segments)
}

fn encode_doc_path(source_doc: &str) -> Result<String, GraphError> {
    let segments = split_nonempty(source_doc, "document id")?;
    Ok(segments
        .iter()
        .map(|s| percent_encode(s, false))
        .collect::<Vec<_>>()
        .join("/"))
}

fn encode_fragment_path(fragment_path: &str) -> Result<String, GraphError> {
    let segments = split_nonempty(fragment_path, "fragment path")?;
    Ok(segments
        .iter()
        .map(|s| percent_encode(s, true))
        .collect::<Vec<_>>()
        .join("-"))
}

/// Percent-encode one path segment. Unreserved ASCII and non-ASCII pass
/// through (IRIs allow raw Unicode). In fragment segments `-` and `~` are
/// encoded as well: `-` is the join character (keeps minting injective) and
/// `~` is reserved for the annotation-node suffix.
fn percent_encode(segment: &str, fragment: bool) -> String {
    let mut out = String::with_capacity(segment.len());
    for ch in segment.chars() {
        let plain = match ch {
            'A'..='Z' | 'a'..='z' | '0'..='9' | '.' | '_' => true,
            '-' | '~' => !fragment,
            c if !c.is_ascii() && !c.is_control() => true,
            _ => false,
        };
        if plain {
            out.push(ch);
        } else {
            let mut buf = [0u8; 4];
            for byte in ch.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{byte:02X}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vocab::DEFAULT_DATA_NS;

    #[test]
    fn mint_matches_stated_scheme() {
        let uri = mint_uri(DEFAULT_DATA_NS, "wikihow/Make-a-Pancake", "method1/step2").unwrap();
        assert_eq!(
            uri.as_str(),
            "http://w3id.org/prohow/data/wikihow/Make-a-Pancake#method1-step2"
        );
    }

    #[test]
    fn mint_is_deterministic() {
        let a = mint_uri(DEFAULT_DATA_NS, "wikihow/Make-a-Pancake", "method1/step2").unwrap();
        let b = mint_uri(DEFAULT_DATA_NS, "wikihow/Make-a-Pancake", "method1/step2").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mint_percent_encodes_spaces() {
        let uri = mint_uri(DEFAULT_DATA_NS, "snapguide/x y", "req/1").unwrap();
        assert_eq!(
            uri.as_str(),
            "http://w3id.org/prohow/data/snapguide/x%20y#req-1"
        );
    }

    #[test]
    fn empty_segment_is_invalid_path() {
        assert!(matches!(
            mint_uri(DEFAULT_DATA_NS, "wikihow/x", "a//b"),
            Err(GraphError::InvalidPath { .. })
        ));
        assert!(matches!(
            mint_uri(DEFAULT_DATA_NS, "wikihow/x", ""),
            Err(GraphError::InvalidPath { .. })
        ));
    }

    #[test]
    fn fragment_dashes_are_encoded() {
        // Segments "a-b"/"c" and "a"/"b-c" must not mint the same URI.
        let first = mint_uri(DEFAULT_DATA_NS, "wikihow/x", "a-b/c").unwrap();
        let second = mint_uri(DEFAULT_DATA_NS, "wikihow/x", "a/b-c").unwrap();
        assert_ne!(first, second);
    }

    #[test]
    fn annotation_uri_cannot_collide_with_minted_entity() {
        let entity = mint_uri(DEFAULT_DATA_NS, "wikihow/x", "step1/~annotation").unwrap();
        let annotated = mint_uri(DEFAULT_DATA_NS, "wikihow/x", "step1").unwrap();
        assert_ne!(entity, annotated.annotation_uri());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(EntityUri::parse("not an iri").is_err());
        assert!(EntityUri::parse("http://a b").is_err());
        assert!(EntityUri::parse("://nope").is_err());
        assert!(EntityUri::parse("http://ok/x#y").is_ok());
    }
}
