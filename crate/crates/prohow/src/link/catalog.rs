//! Lookup backends: the offline catalog file (default) and the remote
//! keyword-search client. Both return ranked candidates; rank travels with
//! the candidate so later tie-breaking never depends on list order.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use super::similarity::similarity;
use super::LinkError;

/// One candidate returned by a lookup backend.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CatalogEntity {
    pub catalog_uri: String,
    pub label: String,
    pub types: BTreeSet<String>,
    /// 1-based position in the lookup response.
    pub lookup_rank: usize,
}

pub trait LookupBackend: Send + Sync {
    /// Ranked candidates for a label, at most `max_hits`. The label must be
    /// non-empty.
    fn lookup(&self, label: &str, max_hits: usize) -> Result<Vec<CatalogEntity>, LinkError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub catalog_uri: String,
    pub label: String,
    pub types: BTreeSet<String>,
}

/// Offline entity catalog loaded from a delimited file:
/// `catalog_uri <TAB> label <TAB> comma-separated type IRIs`.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Self {
        Catalog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn from_tsv(text: &str) -> Result<Self, LinkError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 {
                return Err(LinkError::Catalog {
                    message: format!("line {}: expected at least 2 fields", idx + 1),
                });
            }
            let types = fields
                .get(2)
                .map(|f| {
                    f.split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            entries.push(CatalogEntry {
                catalog_uri: fields[0].to_string(),
                label: fields[1].to_string(),
                types,
            });
        }
        Ok(Catalog { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, LinkError> {
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| LinkError::Catalog {
                message: format!("{}: {e}", path.display()),
            })?;
        Self::from_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                entry.catalog_uri,
                entry.label,
                entry.types.iter().cloned().collect::<Vec<_>>().join(","),
            ));
        }
        out
    }
}

fn label_tokens(label: &str) -> BTreeSet<String> {
    label
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl LookupBackend for Catalog {
    /// Keyword search over entry labels: an entry qualifies when it shares a
    /// token with the query; qualifying entries are ranked by label
    /// similarity (file order breaks ties).
    fn lookup(&self, label: &str, max_hits: usize) -> Result<Vec<CatalogEntity>, LinkError> {
        assert!(
            !label.trim().is_empty(),
            "lookup requires a non-empty label"
        );
        let query_tokens = label_tokens(label);
        let mut scored: Vec<(f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, entry)| !query_tokens.is_disjoint(&label_tokens(&entry.label)))
            .map(|(i, entry)| (similarity(label, &entry.label), i))
            .collect();
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("similarity is finite")
                .then(a.1.cmp(&b.1))
        });
        Ok(scored
            .into_iter()
            .take(max_hits)
            .enumerate()
            .map(|(rank, (_, i))| {
                let entry = &self.entries[i];
                CatalogEntity {
                    catalog_uri: entry.catalog_uri.clone(),
                    label: entry.label.clone(),
                    types: entry.types.clone(),
                    lookup_rank: rank + 1,
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Catalog {
        Catalog::from_tsv(concat!(
            "http://example.org/resource/Milk\tMilk\thttp://example.org/ontology/Food\n",
            "http://example.org/resource/Milkshake\tMilkshake\thttp://example.org/ontology/Food\n",
            "http://example.org/resource/Pancake\tPancake\thttp://example.org/ontology/Food\n",
            "http://example.org/resource/Silk\tSilk\thttp://example.org/ontology/Material\n",
            "http://example.org/resource/Cover_letter\tCover letter\thttp://example.org/ontology/Document\n",
        ))
        .unwrap()
    }

    #[test]
    fn exact_label_ranks_first() {
        let hits = fixture().lookup("milk", 10).unwrap();
        assert_eq!(hits[0].label, "Milk");
        assert_eq!(hits[0].lookup_rank, 1);
    }

    #[test]
    fn unmatched_label_returns_nothing() {
        assert!(fixture().lookup("quantum", 10).unwrap().is_empty());
    }

    #[test]
    fn max_hits_caps_results() {
        let hits = fixture().lookup("milk", 1).unwrap();
        assert_eq!(hits.len(), 1);
    }

    #[test]
    #[should_panic(expected = "non-empty label")]
    fn empty_label_is_a_precondition_violation() {
        let _ = fixture().lookup("  ", 10);
    }

    #[test]
    fn multi_token_query_matches_on_any_token() {
        let hits = fixture().lookup("cover letter", 10).unwrap();
        assert_eq!(hits[0].label, "Cover letter");
    }
}
