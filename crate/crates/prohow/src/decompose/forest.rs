//! Random forest over candidate-pair feature vectors: bagged Gini-split
//! trees with a random feature subset per split and majority-vote leaves.
//! Training is fully determined by (data, hyperparameters, seed); each tree
//! draws from its own derived seed so trees could be built in parallel
//! without changing the model.

use serde::{Deserialize, Serialize};

use crate::util::SplitMix64;

use super::features::{FeatureSchema, FeatureVector};
use super::DecomposeError;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// `None` grows trees until pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features considered per split; `None` means `ceil(sqrt(F))`.
    pub features_per_split: Option<usize>,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        pos: u32,
        neg: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Self {
        Tree { nodes }
    }

    fn vote(&self, values: &[f64]) -> bool {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { pos, neg } => return pos > neg,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if values[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub hyperparams: ForestHyperparams,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

/// One labeled training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub features: FeatureVector,
    pub label: bool,
}

pub fn train_forest(
    samples: &[TrainingSample],
    schema: &FeatureSchema,
    hyperparams: &ForestHyperparams,
    seed: u64,
) -> Result<ForestModel, DecomposeError> {
    if hyperparams.n_trees == 0 {
        return Err(DecomposeError::InvalidHyperparams {
            reason: "forest needs at least one tree".into(),
        });
    }
    if hyperparams.min_leaf == 0 {
        return Err(DecomposeError::InvalidHyperparams {
            reason: "min_leaf must be at least 1".into(),
        });
    }
    let has_pos = samples.iter().any(|s| s.label);
    let has_neg = samples.iter().any(|s| !s.label);
    if !has_pos || !has_neg {
        return Err(DecomposeError::SingleClassData);
    }
    for sample in samples {
        if sample.features.len() != schema.len() {
            return Err(DecomposeError::SchemaMismatch {
                expected: schema.len(),
                got: sample.features.len(),
            });
        }
    }

    let feature_count = schema.len();
    let per_split = hyperparams
        .features_per_split
        .unwrap_or_else(|| (feature_count as f64).sqrt().ceil() as usize)
        .clamp(1, feature_count);

    let trees = (0..hyperparams.n_trees)
        .map(|tree_index| {
            let tree_seed = SplitMix64::derive(seed, tree_index as u64);
            grow_tree(samples, hyperparams, per_split, tree_seed)
        })
        .collect();

    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        schema: schema.clone(),
        hyperparams: hyperparams.clone(),
        seed,
        trees,
    })
}

fn grow_tree(
    samples: &[TrainingSample],
    hyperparams: &ForestHyperparams,
    per_split: usize,
    tree_seed: u64,
) -> Tree {
    let mut rng = SplitMix64::new(tree_seed);
    let n = samples.len();
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(n as u64) as usize).collect();
    let mut nodes = Vec::new();
    build_node(
        samples,
        &bootstrap,
        0,
        hyperparams,
        per_split,
        &mut rng,
        &mut nodes,
    );
    Tree { nodes }
}

fn class_counts(samples: &[TrainingSample], members: &[usize]) -> (u32, u32) {
    let pos = members.iter().filter(|&&i| samples[i].label).count() as u32;
    (pos, members.len() as u32 - pos)
}

fn gini(pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let q = neg / total;
    1.0 - p * p - q * q
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn build_node(
    samples: &[TrainingSample],
    members: &[usize],
    depth: usize,
    hyperparams: &ForestHyperparams,
    per_split: usize,
    rng: &mut SplitMix64,
    nodes: &mut Vec<TreeNode>,
) -> u32 {
    let (pos, neg) = class_counts(samples, members);
    let index = nodes.len() as u32;

    let depth_reached = hyperparams.max_depth.is_some_and(|limit| depth >= limit);
    let splittable = members.len() >= 2 * hyperparams.min_leaf;
    if pos == 0 || neg == 0 || depth_reached || !splittable {
        nodes.push(TreeNode::Leaf { pos, neg });
        return index;
    }

    let feature_count = samples[0].features.len();
    let mut subset = rng.sample_indices(feature_count, per_split);
    subset.sort_unstable();

    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(members.len());
    for &feature in &subset {
        column.clear();
        column.extend(
            members
                .iter()
                .map(|&i| (samples[i].features.values[feature], samples[i].label)),
        );
        column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("features are finite"));

        let total_pos = pos as f64;
        let total = members.len() as f64;
        let mut left_pos = 0.0;
        let mut left_n = 0.0;
        for i in 1..column.len() {
            left_pos += f64::from(column[i - 1].1);
            left_n += 1.0;
            if column[i - 1].0 == column[i].0 {
                continue; // no boundary between equal values
            }
            let right_n = total - left_n;
            if (left_n as usize) < hyperparams.min_leaf || (right_n as usize) < hyperparams.min_leaf
            {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let impurity = (left_n * gini(left_pos, left_n - left_pos)
                + right_n * gini(right_pos, right_n - right_pos))
                / total;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                // Threshold is the left block's maximum so the partition
                // test `value <= threshold` reproduces this exact split.
                best = Some(BestSplit {
                    feature,
                    threshold: column[i - 1].0,
                    impurity,
                });
            }
        }
    }

    let Some(split) = best else {
        nodes.push(TreeNode::Leaf { pos, neg });
        return index;
    };

    let (left_members, right_members): (Vec<usize>, Vec<usize>) = members
        .iter()
        .partition(|&&i| samples[i].features.values[split.feature] <= split.threshold);

    nodes.push(TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build_node(
        samples,
        &left_members,
        depth + 1,
        hyperparams,
        per_split,
        rng,
        nodes,
    );
    let right = build_node(
        samples,
        &right_members,
        depth + 1,
        hyperparams,
        per_split,
        rng,
        nodes,
    );
    match &mut nodes[index as usize] {
        TreeNode::Split {
            left: l, right: r, ..
        } => {
            *l = left;
            *r = right;
        }
        TreeNode::Leaf { .. } => unreachable!("node was pushed as a split"),
    }
    index
}

impl ForestModel {
    /// Fraction of trees voting positive, and the label at the 0.5 cut.
    pub fn predict(&self, fv: &FeatureVector) -> Result<(bool, f64), DecomposeError> {
        self.predict_with_threshold(fv, 0.5)
    }

    pub fn predict_with_threshold(
        &self,
        fv: &FeatureVector,
        threshold: f64,
    ) -> Result<(bool, f64), DecomposeError> {
        if self.trees.is_empty() {
            return Err(DecomposeError::EmptyModel);
        }
        if fv.len() != self.schema.len() {
            return Err(DecomposeError::SchemaMismatch {
                expected: self.schema.len(),
                got: fv.len(),
            });
        }
        let positive = self.trees.iter().filter(|t| t.vote(&fv.values)).count();
        let score = positive as f64 / self.trees.len() as f64;
        Ok((score >= threshold, score))
    }

    /// Structured text serialization: schema, hyperparameters, seed, and the
    /// full tree structure. Byte-identical for identical models.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("model serialization cannot fail");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, DecomposeError> {
        let model: ForestModel =
            serde_json::from_str(text).map_err(|e| DecomposeError::ModelFormat {
                message: e.to_string(),
            })?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(DecomposeError::ModelFormat {
                message: format!("unsupported model version {}", model.format_version),
            });
        }
        let width = model.schema.len();
        for tree in &model.trees {
            for node in &tree.nodes {
                if let TreeNode::Split {
                    feature,
                    left,
                    right,
                    ..
                } = node
                {
                    if *feature >= width
                        || *left as usize >= tree.nodes.len()
                        || *right as usize >= tree.nodes.len()
                    {
                        return Err(DecomposeError::ModelFormat {
                            message: "tree references out-of-range feature or node".into(),
                        });
                    }
                }
            }
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvMetrics {
    pub folds: Vec<FoldMetrics>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_accuracy: f64,
}

/// Seeded shuffle dealt round-robin into `folds` disjoint index sets whose
/// sizes differ by at most one.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(SplitMix64::derive(seed, 0x666f6c64)).shuffle(&mut order);
    (0..folds)
        .map(|fold| order.iter().skip(fold).step_by(folds).copied().collect())
        .collect()
}

/// Seeded k-fold cross validation: shuffle once, deal indices round-robin
/// (fold sizes differ by at most one), train on k−1 folds, test on the held
/// out fold. Precision counts predicted positives; a fold that predicts no
/// positives is vacuously precise.
pub fn cross_validate(
    samples: &[TrainingSample],
    folds: usize,
    schema: &FeatureSchema,
    hyperparams: &ForestHyperparams,
    seed: u64,
) -> Result<CvMetrics, DecomposeError> {
    if folds < 2 || samples.len() < folds {
        return Err(DecomposeError::TooFewExamples {
            have: samples.len(),
            folds,
        });
    }
    let assignment = fold_indices(samples.len(), folds, seed);

    let mut fold_metrics = Vec::with_capacity(folds);
    for (fold, test) in assignment.iter().enumerate() {
        let test_set: std::collections::BTreeSet<usize> = test.iter().copied().collect();
        let train: Vec<TrainingSample> = (0..samples.len())
            .filter(|i| !test_set.contains(i))
            .map(|i| samples[i].clone())
            .collect();
        let model = train_forest(
            &train,
            schema,
            hyperparams,
            SplitMix64::derive(seed, fold as u64 + 1),
        )?;

        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        let mut correct = 0usize;
        for &i in test {
            let (predicted, _) = model.predict(&samples[i].features)?;
            let actual = samples[i].label;
            if predicted == actual {
                correct += 1;
            }
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let accuracy = correct as f64 / test.len() as f64;
        fold_metrics.push(FoldMetrics {
            precision,
            recall,
            accuracy,
        });
    }

    let mean = |f: fn(&FoldMetrics) -> f64| {
        fold_metrics.iter().map(f).sum::<f64>() / fold_metrics.len() as f64
    };
    Ok(CvMetrics {
        mean_precision: mean(|m| m.precision),
        mean_recall: mean(|m| m.recall),
        mean_accuracy: mean(|m| m.accuracy),
        folds: fold_metrics,
    })
}
