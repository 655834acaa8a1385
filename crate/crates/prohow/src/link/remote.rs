//! HTTP client for a remote keyword-search endpoint. The endpoint takes
//! `GET <url>?query=<label>&max-hits=<n>` and answers with JSON:
//! `{"results": [{"uri": "...", "label": "...", "classes": ["..."]}]}`,
//! candidates in ranked order.
//!
//! The offline catalog is the default backend; this client exists for
//! deployments that point at a live lookup service. Requests are bounded by
//! a concurrency ceiling so multiple workers cannot stampede the service.

use std::collections::BTreeSet;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;

use super::catalog::{CatalogEntity, LookupBackend};
use super::LinkError;

#[derive(Debug, Clone)]
pub struct RemoteLookupConfig {
    pub endpoint: String,
    pub timeout: Duration,
    /// Upper bound on in-flight requests across all threads.
    pub max_concurrent: usize,
    /// Extra attempts after the first failure before giving up on a label.
    pub retries: usize,
}

impl Default for RemoteLookupConfig {
    fn default() -> Self {
        RemoteLookupConfig {
            endpoint: String::new(),
            timeout: Duration::from_secs(10),
            max_concurrent: 4,
            retries: 2,
        }
    }
}

pub struct RemoteLookup {
    config: RemoteLookupConfig,
    agent: ureq::Agent,
    gate: Semaphore,
}

impl RemoteLookup {
    pub fn new(config: RemoteLookupConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let gate = Semaphore::new(config.max_concurrent.max(1));
        RemoteLookup {
            config,
            agent,
            gate,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RemoteResponse {
    results: Vec<RemoteHit>,
}

#[derive(Debug, Deserialize)]
struct RemoteHit {
    uri: String,
    label: String,
    #[serde(default)]
    classes: Vec<String>,
}

impl LookupBackend for RemoteLookup {
    fn lookup(&self, label: &str, max_hits: usize) -> Result<Vec<CatalogEntity>, LinkError> {
        assert!(
            !label.trim().is_empty(),
            "lookup requires a non-empty label"
        );
        let url = format!(
            "{}?query={}&max-hits={}",
            self.config.endpoint,
            urlencode(label),
            max_hits
        );
        let mut last_error = String::new();
        for _ in 0..=self.config.retries {
            let _permit = self.gate.acquire();
            match self.agent.get(&url).call() {
                Ok(response) => {
                    let body: RemoteResponse =
                        response
                            .into_json()
                            .map_err(|e| LinkError::BackendUnavailable {
                                message: format!("malformed lookup response: {e}"),
                            })?;
                    return Ok(body
                        .results
                        .into_iter()
                        .take(max_hits)
                        .enumerate()
                        .map(|(rank, hit)| CatalogEntity {
                            catalog_uri: hit.uri,
                            label: hit.label,
                            types: hit.classes.into_iter().collect::<BTreeSet<_>>(),
                            lookup_rank: rank + 1,
                        })
                        .collect());
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(LinkError::BackendUnavailable {
            message: last_error,
        })
    }
}

fn urlencode(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            'A'..='Z' | 'a'..='z' | '0'..='9' | '-' | '.' | '_' | '~' => out.push(ch),
            _ => {
                let mut buf = [0u8; 4];
                for byte in ch.encode_utf8(&mut buf).bytes() {
                    out.push_str(&format!("%{byte:02X}"));
                }
            }
        }
    }
    out
}

/// Counting semaphore on std primitives.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

struct Permit<'a> {
    semaphore: &'a Semaphore,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut permits = self.permits.lock().expect("semaphore poisoned");
        while *permits == 0 {
            permits = self.available.wait(permits).expect("semaphore poisoned");
        }
        *permits -= 1;
        Permit { semaphore: self }
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut permits = self.semaphore.permits.lock().expect("semaphore poisoned");
        *permits += 1;
        self.semaphore.available.notify_one();
    }
}
