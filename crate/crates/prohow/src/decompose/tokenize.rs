//! Tokenizer shared by indexing, retrieval, and feature extraction:
//! lowercase, split on non-alphanumeric characters, drop stopwords, no
//! stemming.

use std::collections::BTreeSet;
use std::path::Path;

use super::DecomposeError;

const DEFAULT_STOPWORDS: &str = include_str!("../../assets/stopwords.txt");

#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
}

impl Tokenizer {
    /// Tokenizer with the bundled English stopword list.
    pub fn bundled() -> Self {
        Self::from_text(DEFAULT_STOPWORDS)
    }

    /// One stopword per line; `#` comments and blank lines ignored.
    pub fn from_text(text: &str) -> Self {
        let stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Tokenizer { stopwords }
    }

    pub fn from_path(path: &Path) -> Result<Self, DecomposeError> {
        let text = std::fs::read_to_string(path).map_err(|e| DecomposeError::Io {
            message: format!("{}: {e}", path.display()),
        })?;
        Ok(Self::from_text(&text))
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty() && !self.stopwords.contains(*t))
            .map(str::to_string)
            .collect()
    }

    /// Distinct tokens, for set-based comparisons.
    pub fn token_set(&self, text: &str) -> BTreeSet<String> {
        self.tokenize(text).into_iter().collect()
    }
}
