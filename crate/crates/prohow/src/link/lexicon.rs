//! Creation-verb lexicon and output detection over process titles.

use std::collections::BTreeSet;
use std::path::Path;

use super::LinkError;

const DEFAULT_VERBS: &str = include_str!("../../assets/creation_verbs.txt");
const DETERMINERS: &[&str] = &["a", "an", "the", "your", "some"];

/// Verbs that semantically imply the creation of their object.
#[derive(Debug, Clone)]
pub struct CreationLexicon {
    verbs: BTreeSet<String>,
}

impl CreationLexicon {
    pub fn bundled() -> Self {
        Self::from_text(DEFAULT_VERBS)
    }

    /// One verb per line; `#` comments and blank lines ignored.
    pub fn from_text(text: &str) -> Self {
        let verbs = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        CreationLexicon { verbs }
    }

    pub fn from_path(path: &Path) -> Result<Self, LinkError> {
        let text = std::fs::read_to_string(path).map_err(|e| LinkError::Catalog {
            message: format!("{}: {e}", path.display()),
        })?;
        Ok(Self::from_text(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.verbs.contains(token)
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

/// Split a title into lowercase alphanumeric tokens. No stopword removal:
/// determiners are needed intact for the leading-strip rule.
fn title_tokens(title: &str) -> Vec<String> {
    title
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Detect the object a process creates, if its title contains a creation
/// verb: the token span after the first creation verb, with leading
/// determiners, stopwords, and further creation verbs stripped. `None` when
/// no creation verb occurs or nothing is left of the object phrase.
pub fn detect_output(
    title: &str,
    lexicon: &CreationLexicon,
    stopwords: &crate::decompose::Tokenizer,
) -> Option<String> {
    assert!(
        !title.trim().is_empty(),
        "detect_output requires a non-empty title"
    );
    let tokens = title_tokens(title);
    let verb_at = tokens.iter().position(|t| lexicon.contains(t))?;
    let mut object = &tokens[verb_at + 1..];
    while let Some(head) = object.first() {
        if DETERMINERS.contains(&head.as_str())
            || stopwords.is_stopword(head)
            || lexicon.contains(head)
        {
            object = &object[1..];
        } else {
            break;
        }
    }
    if object.is_empty() {
        None
    } else {
        Some(object.join(" "))
    }
}
