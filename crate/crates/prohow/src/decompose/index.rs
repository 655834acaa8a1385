//! Inverted index over the textual descriptions of primitive entities, and
//! idf-weighted candidate retrieval for complex processes.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{EntityUri, KnowHowGraph, ProcessEntity};

use super::tokenize::Tokenizer;
use super::{CandidatePair, DecomposeError};

/// Index format version written into `index.bin`.
pub const INDEX_FORMAT_VERSION: u32 = 1;
const INDEX_MAGIC: &[u8; 8] = b"PROHOWIX";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvertedIndex {
    /// term → (entity → term frequency)
    postings: BTreeMap<String, BTreeMap<EntityUri, u32>>,
    /// entity → total token count of its indexed text
    doc_lengths: BTreeMap<EntityUri, u32>,
    /// entity → source document id, for same-document exclusion
    doc_sources: BTreeMap<EntityUri, String>,
    /// term → number of distinct entities containing it
    doc_freq: BTreeMap<String, u32>,
}

/// The text indexed for an entity: label plus detail when present.
pub fn indexed_text(entity: &ProcessEntity) -> String {
    match &entity.detail {
        Some(detail) => format!("{} {}", entity.label, detail),
        None => entity.label.clone(),
    }
}

/// Index every primitive entity of the graph.
pub fn build_index(graph: &KnowHowGraph, tokenizer: &Tokenizer) -> InvertedIndex {
    let mut index = InvertedIndex::default();
    for entity in graph.entities() {
        if !graph
            .is_primitive(&entity.uri)
            .expect("entity comes from this graph")
        {
            continue;
        }
        let tokens = tokenizer.tokenize(&indexed_text(entity));
        index
            .doc_lengths
            .insert(entity.uri.clone(), tokens.len() as u32);
        index
            .doc_sources
            .insert(entity.uri.clone(), entity.source_doc.clone());
        let mut seen = BTreeSet::new();
        for token in tokens {
            *index
                .postings
                .entry(token.clone())
                .or_default()
                .entry(entity.uri.clone())
                .or_insert(0) += 1;
            if seen.insert(token.clone()) {
                *index.doc_freq.entry(token).or_insert(0) += 1;
            }
        }
    }
    index
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn doc_length(&self, entity: &EntityUri) -> Option<u32> {
        self.doc_lengths.get(entity).copied()
    }

    pub fn contains_entity(&self, entity: &EntityUri) -> bool {
        self.doc_lengths.contains_key(entity)
    }

    pub fn postings(&self, term: &str) -> Option<&BTreeMap<EntityUri, u32>> {
        self.postings.get(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = &String> {
        self.postings.keys()
    }

    /// Inverse document frequency: `ln(N / (1 + df))`, clamped at zero so
    /// ubiquitous terms score nothing rather than negatively. Unseen terms
    /// use df = 0. Requires a non-empty index.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count();
        assert!(n > 0, "idf requires a non-empty index");
        let df = self.doc_freq(term);
        (n as f64 / (1.0 + df as f64)).ln().max(0.0)
    }

    /// Retrieval score of one (query tokens, primitive) pair: the idf sum of
    /// shared terms, accumulated in sorted term order, normalized by the
    /// primitive's token count. `None` if the entity is not indexed.
    pub fn pair_score(&self, query_terms: &BTreeSet<String>, primitive: &EntityUri) -> Option<f64> {
        let length = self.doc_length(primitive)?;
        let mut sum = 0.0;
        for term in query_terms {
            if self
                .postings
                .get(term)
                .is_some_and(|p| p.contains_key(primitive))
            {
                sum += self.idf(term);
            }
        }
        Some(if length == 0 {
            0.0
        } else {
            sum / length as f64
        })
    }

    /// Top-k primitive entities sharing at least one term with the complex
    /// process, scored by length-normalized idf overlap. Ties break toward
    /// the lexicographically smaller URI; entities from the complex
    /// process's own document are excluded.
    pub fn retrieve_candidates(
        &self,
        complex: &ProcessEntity,
        k: usize,
        tokenizer: &Tokenizer,
    ) -> Vec<CandidatePair> {
        assert!(k >= 1, "retrieve_candidates requires k >= 1");
        if self.doc_count() == 0 {
            return Vec::new();
        }
        let query_terms = tokenizer.token_set(&indexed_text(complex));
        // Accumulation must visit terms in sorted order for every entity so
        // the floating-point sum is identical to a per-entity rescore.
        let mut accumulated: BTreeMap<&EntityUri, f64> = BTreeMap::new();
        for term in &query_terms {
            let Some(postings) = self.postings.get(term) else {
                continue;
            };
            let weight = self.idf(term);
            for entity in postings.keys() {
                if self.doc_sources.get(entity).map(String::as_str)
                    == Some(complex.source_doc.as_str())
                {
                    continue;
                }
                *accumulated.entry(entity).or_insert(0.0) += weight;
            }
        }
        let mut scored: Vec<(f64, &EntityUri)> = accumulated
            .into_iter()
            .map(|(entity, sum)| {
                let length = self.doc_lengths[entity].max(1) as f64;
                (sum / length, entity)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("scores are finite")
                .then_with(|| a.1.cmp(b.1))
        });
        scored
            .into_iter()
            .take(k)
            .map(|(score, primitive)| CandidatePair {
                complex: complex.uri.clone(),
                primitive: primitive.clone(),
                retrieval_score: score,
            })
            .collect()
    }

    /// Binary index file: magic, version, document table, postings. All
    /// sections sorted, so encoding is deterministic.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(INDEX_MAGIC);
        out.extend_from_slice(&INDEX_FORMAT_VERSION.to_le_bytes());

        let docs: Vec<&EntityUri> = self.doc_lengths.keys().collect();
        let doc_ids: BTreeMap<&EntityUri, u32> = docs
            .iter()
            .enumerate()
            .map(|(i, uri)| (*uri, i as u32))
            .collect();

        write_u64(&mut out, docs.len() as u64);
        for uri in &docs {
            write_str(&mut out, uri.as_str());
            write_u32(&mut out, self.doc_lengths[*uri]);
            write_str(&mut out, &self.doc_sources[*uri]);
        }
        write_u64(&mut out, self.postings.len() as u64);
        for (term, postings) in &self.postings {
            write_str(&mut out, term);
            write_u32(&mut out, self.doc_freq[term]);
            write_u32(&mut out, postings.len() as u32);
            for (uri, tf) in postings {
                write_u32(&mut out, doc_ids[uri]);
                write_u32(&mut out, *tf);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecomposeError> {
        let mut r = Reader { bytes, at: 0 };
        let magic = r.take(8)?;
        if magic != INDEX_MAGIC {
            return Err(DecomposeError::IndexFormat {
                message: "bad magic".into(),
            });
        }
        let version = r.u32()?;
        if version != INDEX_FORMAT_VERSION {
            return Err(DecomposeError::IndexFormat {
                message: format!("unsupported index version {version}"),
            });
        }
        let mut index = InvertedIndex::default();
        let doc_count = r.u64()? as usize;
        let mut docs = Vec::with_capacity(doc_count);
        for _ in 0..doc_count {
            let uri = EntityUri::parse(r.string()?).map_err(|e| DecomposeError::IndexFormat {
                message: e.to_string(),
            })?;
            let length = r.u32()?;
            let source = r.string()?;
            index.doc_lengths.insert(uri.clone(), length);
            index.doc_sources.insert(uri.clone(), source);
            docs.push(uri);
        }
        let term_count = r.u64()? as usize;
        for _ in 0..term_count {
            let term = r.string()?;
            let df = r.u32()?;
            let postings_len = r.u32()? as usize;
            let mut postings = BTreeMap::new();
            for _ in 0..postings_len {
                let doc_idx = r.u32()? as usize;
                let tf = r.u32()?;
                let uri = docs
                    .get(doc_idx)
                    .ok_or_else(|| DecomposeError::IndexFormat {
                        message: format!("posting references unknown document {doc_idx}"),
                    })?;
                postings.insert(uri.clone(), tf);
            }
            if df as usize != postings.len() {
                return Err(DecomposeError::IndexFormat {
                    message: format!("doc_freq mismatch for term {term:?}"),
                });
            }
            index.doc_freq.insert(term.clone(), df);
            index.postings.insert(term, postings);
        }
        Ok(index)
    }
}

fn write_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    write_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecomposeError> {
        if self.at + n > self.bytes.len() {
            return Err(DecomposeError::IndexFormat {
                message: "truncated index".into(),
            });
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, DecomposeError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, DecomposeError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn string(&mut self) -> Result<String, DecomposeError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| DecomposeError::IndexFormat {
            message: "non-UTF-8 string".into(),
        })
    }
}
