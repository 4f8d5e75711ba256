//! CART decision tree with weighted Gini impurity, the shared base learner
//! for both ensembles.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::seeding::{self, SALT_TREE};

use super::Classifier;

const GAIN_EPSILON: f64 = 1e-12;

/// Per-node feature subsampling policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    All,
    /// floor(sqrt(25)) = 5 features per node.
    Sqrt,
    Count(usize),
}

impl FeatureSubsample {
    fn count(self) -> usize {
        match self {
            FeatureSubsample::All => NUM_FEATURES,
            FeatureSubsample::Sqrt => (NUM_FEATURES as f64).sqrt().floor() as usize,
            FeatureSubsample::Count(m) => m.clamp(1, NUM_FEATURES),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// None = unlimited depth. A limit of 0 yields a single leaf.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub feature_subsample: FeatureSubsample,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            feature_subsample: FeatureSubsample::All,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::Config(format!(
                "min_samples_split must be >= 2, got {}",
                self.min_samples_split
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: [f64; NUM_CLASSES],
    },
}

/// Fitted tree stored as an arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
}

impl TreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl Classifier for TreeModel {
    fn predict_proba(&self, sample: &[f64]) -> [f64; NUM_CLASSES] {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { distribution } => return distribution,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    // values equal to the threshold go left
                    i = if sample[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Gini impurity of a node with the given (possibly weighted) class counts:
/// 1 - sum((n_c / N)^2). Range [0, 0.75] for four classes.
pub fn gini_impurity(class_counts: &[f64; NUM_CLASSES]) -> Result<f64> {
    let total: f64 = class_counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::Fit("gini impurity of an empty node is undefined".into()));
    }
    let sum_sq: f64 = class_counts.iter().map(|&c| (c / total) * (c / total)).sum();
    Ok(1.0 - sum_sq)
}

fn gini_from_counts(counts: &[f64; NUM_CLASSES], total: f64) -> f64 {
    let sum_sq: f64 = counts.iter().map(|&c| (c / total) * (c / total)).sum();
    1.0 - sum_sq
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best split over the candidate features, with thresholds at midpoints
/// between consecutive distinct sorted values. Maximizes the weighted Gini
/// decrease; ties broken by lower feature index, then lower threshold.
/// Returns None when no split has positive gain.
///
/// `candidate_features` must be sorted ascending for the tie rule to hold.
pub fn find_best_split(
    data: &Dataset,
    rows: &[usize],
    weights: Option<&[f64]>,
    candidate_features: &[usize],
) -> Option<Split> {
    if rows.len() < 2 {
        return None;
    }
    let weight_of = |i: usize| weights.map_or(1.0, |w| w[i]);

    let mut parent_counts = [0.0; NUM_CLASSES];
    for &i in rows {
        parent_counts[data.label(i).code()] += weight_of(i);
    }
    let total: f64 = parent_counts.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let parent_impurity = gini_from_counts(&parent_counts, total);

    let mut best: Option<Split> = None;
    let mut sorted: Vec<(f64, usize, f64)> = Vec::with_capacity(rows.len());
    for &feature in candidate_features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (data.row(i)[feature], data.label(i).code(), weight_of(i))));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        let mut left_counts = [0.0; NUM_CLASSES];
        let mut left_total = 0.0;
        for k in 0..sorted.len() - 1 {
            let (value, class, weight) = sorted[k];
            left_counts[class] += weight;
            left_total += weight;
            let next_value = sorted[k + 1].0;
            if next_value <= value {
                continue;
            }
            let threshold = (value + next_value) / 2.0;
            let right_total = total - left_total;
            if left_total <= 0.0 || right_total <= 0.0 {
                continue;
            }
            let mut right_counts = [0.0; NUM_CLASSES];
            for c in 0..NUM_CLASSES {
                right_counts[c] = parent_counts[c] - left_counts[c];
            }
            let child_impurity = (left_total / total) * gini_from_counts(&left_counts, left_total)
                + (right_total / total) * gini_from_counts(&right_counts, right_total);
            let gain = parent_impurity - child_impurity;
            // Gains within GAIN_EPSILON are ties; the earlier candidate
            // (lower feature, lower threshold) wins.
            if gain > GAIN_EPSILON && best.map_or(true, |b| gain > b.gain + GAIN_EPSILON) {
                best = Some(Split {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

/// Fit a CART tree by recursive greedy growth. `weights` (when given) are
/// per-sample nonnegative reals used both for split search and for the leaf
/// class proportions; this is the weighted variant boosting needs.
pub fn fit_tree(
    train: &Dataset,
    weights: Option<&[f64]>,
    cfg: &TreeConfig,
    seed: u64,
) -> Result<TreeModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Fit("cannot fit a tree on an empty dataset".into()));
    }
    if let Some(w) = weights {
        if w.len() != train.len() {
            return Err(Error::Fit(format!(
                "{} weights for {} samples",
                w.len(),
                train.len()
            )));
        }
        if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Fit("sample weights must be finite and nonnegative".into()));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Fit("sample weights must sum to a positive value".into()));
        }
    }

    let mut rng = seeding::rng(seed, &[SALT_TREE]);
    let rows: Vec<usize> = (0..train.len()).collect();
    let mut nodes = Vec::new();
    grow(train, weights, cfg, &mut rng, &rows, 0, &mut nodes)?;
    Ok(TreeModel { nodes })
}

fn leaf_distribution(
    train: &Dataset,
    weights: Option<&[f64]>,
    rows: &[usize],
) -> [f64; NUM_CLASSES] {
    let mut counts = [0.0; NUM_CLASSES];
    for &i in rows {
        counts[train.label(i).code()] += weights.map_or(1.0, |w| w[i]);
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        for c in counts.iter_mut() {
            *c /= total;
        }
    } else {
        // All-zero-weight node: fall back to unweighted proportions.
        for &i in rows {
            counts[train.label(i).code()] += 1.0;
        }
        let n = rows.len() as f64;
        for c in counts.iter_mut() {
            *c /= n;
        }
    }
    counts
}

fn grow(
    train: &Dataset,
    weights: Option<&[f64]>,
    cfg: &TreeConfig,
    rng: &mut ChaCha8Rng,
    rows: &[usize],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> Result<usize> {
    let index = nodes.len();
    let distribution = leaf_distribution(train, weights, rows);
    let pure = distribution.iter().filter(|&&p| p > 0.0).count() <= 1;
    let depth_stop = cfg.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_stop || rows.len() < cfg.min_samples_split {
        nodes.push(Node::Leaf { distribution });
        return Ok(index);
    }

    // Per-node feature draw from the tree's seeded stream (DFS order keeps
    // this deterministic).
    let m = cfg.feature_subsample.count();
    let candidates: Vec<usize> = if m >= NUM_FEATURES {
        (0..NUM_FEATURES).collect()
    } else {
        let mut picked = rand::seq::index::sample(rng, NUM_FEATURES, m).into_vec();
        picked.sort_unstable();
        picked
    };

    let Some(split) = find_best_split(train, rows, weights, &candidates) else {
        nodes.push(Node::Leaf { distribution });
        return Ok(index);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| train.row(i)[split.feature] <= split.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

    nodes.push(Node::Leaf { distribution }); // placeholder, patched below
    let left = grow(train, weights, cfg, rng, &left_rows, depth + 1, nodes)?;
    let right = grow(train, weights, cfg, rng, &right_rows, depth + 1, nodes)?;
    nodes[index] = Node::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    Ok(index)
}

#[cfg(test)]
pub(crate) mod test_util {
    use crate::domain::{Dataset, FeatureSchema, RiskLabel, NUM_FEATURES};

    /// Dataset where only the listed feature columns vary; all others zero.
    pub(crate) fn dataset_from_columns(
        columns: &[(usize, Vec<f64>)],
        labels: Vec<RiskLabel>,
    ) -> Dataset {
        let n = labels.len();
        let mut features = vec![0.0; n * NUM_FEATURES];
        for (feature, values) in columns {
            assert_eq!(values.len(), n);
            for (row, &v) in values.iter().enumerate() {
                features[row * NUM_FEATURES + feature] = v;
            }
        }
        Dataset::new(features, labels, FeatureSchema::default()).unwrap()
    }
}
