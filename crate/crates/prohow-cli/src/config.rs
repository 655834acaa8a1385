//! Pipeline configuration: one key-value text file, flag overrides, and two
//! environment overrides (lookup endpoint, worker count). Every seed is
//! explicit in the file — nothing falls back to the clock.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub catalog: Option<PathBuf>,
    pub lookup_endpoint: Option<String>,
    pub base_namespace: String,
    pub tau: f64,
    pub max_hits: usize,
    pub creation_verbs: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub index_k: usize,
    pub trees: usize,
    /// 0 means unlimited depth.
    pub max_depth: usize,
    pub min_leaf: usize,
    pub decision_threshold: f64,
    pub seed: u64,
    pub cv_folds: usize,
    pub labels: Option<PathBuf>,
    pub judgments_io: Option<PathBuf>,
    pub judgments_decomposition: Option<PathBuf>,
    pub workers: usize,
    pub lookup_timeout_ms: u64,
    pub lookup_max_concurrent: usize,
    pub lookup_retries: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "corpus_dir",
    "output_dir",
    "catalog",
    "lookup_endpoint",
    "base_namespace",
    "tau",
    "max_hits",
    "creation_verbs",
    "stopwords",
    "index_k",
    "trees",
    "max_depth",
    "min_leaf",
    "decision_threshold",
    "seed",
    "cv_folds",
    "labels",
    "judgments_io",
    "judgments_decomposition",
    "workers",
    "lookup_timeout_ms",
    "lookup_max_concurrent",
    "lookup_retries",
];

/// Parse `key = value` lines; `#` starts a comment, blank lines are ignored.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`", idx + 1))?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key {key:?}", idx + 1);
        }
        pairs.insert(key, value.trim().to_string());
    }
    Ok(pairs)
}

impl PipelineConfig {
    /// Load a config file. `overrides` are `key=value` pairs from the
    /// command line and win over the file; the `PROHOW_LOOKUP_ENDPOINT` and
    /// `PROHOW_WORKERS` environment variables win over both.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut pairs = parse_pairs(&text)?;
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("override {entry:?}: expected key=value"))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("override references unknown key {key:?}");
            }
            pairs.insert(key.to_string(), value.trim().to_string());
        }
        if let Ok(endpoint) = std::env::var("PROHOW_LOOKUP_ENDPOINT") {
            if !endpoint.is_empty() {
                pairs.insert("lookup_endpoint".to_string(), endpoint);
            }
        }
        if let Ok(workers) = std::env::var("PROHOW_WORKERS") {
            if !workers.is_empty() {
                pairs.insert("workers".to_string(), workers);
            }
        }
        Self::from_pairs(pairs, path.parent().unwrap_or(Path::new(".")))
    }

    fn from_pairs(pairs: BTreeMap<String, String>, root: &Path) -> Result<Self> {
        let get = |key: &str| pairs.get(key).map(String::as_str);
        let resolve = |value: &str| -> PathBuf {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                root.join(p)
            }
        };
        let parse_num = |key: &str, default: &str| -> Result<u64> {
            get(key)
                .unwrap_or(default)
                .parse::<u64>()
                .with_context(|| format!("config key {key} must be a non-negative integer"))
        };
        let parse_real = |key: &str, default: &str| -> Result<f64> {
            get(key)
                .unwrap_or(default)
                .parse::<f64>()
                .with_context(|| format!("config key {key} must be a number"))
        };

        let corpus_dir =
            resolve(get("corpus_dir").ok_or_else(|| anyhow!("config key corpus_dir missing"))?);
        let output_dir =
            resolve(get("output_dir").ok_or_else(|| anyhow!("config key output_dir missing"))?);
        let seed = get("seed")
            .ok_or_else(|| anyhow!("config key seed missing: every run must pin its seed"))?
            .parse::<u64>()
            .context("config key seed must be an unsigned integer")?;

        let config = PipelineConfig {
            corpus_dir,
            output_dir,
            catalog: get("catalog").map(resolve),
            lookup_endpoint: get("lookup_endpoint").map(str::to_string),
            base_namespace: get("base_namespace")
                .unwrap_or(prohow::graph::vocab::DEFAULT_DATA_NS)
                .trim_end_matches('/')
                .to_string(),
            tau: parse_real("tau", "0.8")?,
            max_hits: parse_num("max_hits", "10")? as usize,
            creation_verbs: get("creation_verbs").map(resolve),
            stopwords: get("stopwords").map(resolve),
            index_k: parse_num("index_k", "50")? as usize,
            trees: parse_num("trees", "100")? as usize,
            max_depth: parse_num("max_depth", "0")? as usize,
            min_leaf: parse_num("min_leaf", "1")? as usize,
            decision_threshold: parse_real("decision_threshold", "0.5")?,
            seed,
            cv_folds: parse_num("cv_folds", "10")? as usize,
            labels: get("labels").map(resolve),
            judgments_io: get("judgments_io").map(resolve),
            judgments_decomposition: get("judgments_decomposition").map(resolve),
            workers: parse_num("workers", "1")? as usize,
            lookup_timeout_ms: parse_num("lookup_timeout_ms", "10000")?,
            lookup_max_concurrent: parse_num("lookup_max_concurrent", "4")? as usize,
            lookup_retries: parse_num("lookup_retries", "2")? as usize,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !self.corpus_dir.is_dir() {
            bail!("corpus_dir {} does not exist", self.corpus_dir.display());
        }
        for (key, path) in [
            ("catalog", &self.catalog),
            ("creation_verbs", &self.creation_verbs),
            ("stopwords", &self.stopwords),
            ("labels", &self.labels),
            ("judgments_io", &self.judgments_io),
            ("judgments_decomposition", &self.judgments_decomposition),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    bail!("{key} {} does not exist", path.display());
                }
            }
        }
        if self.catalog.is_none() && self.lookup_endpoint.is_none() {
            bail!("either catalog or lookup_endpoint must be configured");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            bail!("tau must be in [0, 1], got {}", self.tau);
        }
        if !(0.0..=1.0).contains(&self.decision_threshold) {
            bail!(
                "decision_threshold must be in [0, 1], got {}",
                self.decision_threshold
            );
        }
        if self.index_k == 0 || self.max_hits == 0 || self.trees == 0 || self.min_leaf == 0 {
            bail!("index_k, max_hits, trees, and min_leaf must be at least 1");
        }
        if self.cv_folds < 2 {
            bail!("cv_folds must be at least 2");
        }
        Ok(())
    }
}
