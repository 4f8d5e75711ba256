//! Multiclass AdaBoost (SAMME) over weighted CART trees.
//!
//! Each round fits a weighted tree, computes the weighted error, keeps the
//! round iff alpha = ln((1-err)/err) + ln(K-1) is positive, reweights the
//! misclassified samples and renormalizes.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, RiskLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seeding::{self, SALT_BOOST};

use super::tree::{fit_tree, FeatureSubsample, TreeConfig, TreeModel};
use super::{argmax_label, Classifier};

/// Weighted error below this is treated as a perfect round: the learner is
/// kept with a capped alpha and boosting stops early.
const PERFECT_ERR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub tree: TreeConfig,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_rounds: 100,
            tree: TreeConfig {
                max_depth: Some(3),
                min_samples_split: 2,
                feature_subsample: FeatureSubsample::All,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    learners: Vec<TreeModel>,
    alphas: Vec<f64>,
}

impl BoostModel {
    pub fn learners(&self) -> &[TreeModel] {
        &self.learners
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn n_rounds(&self) -> usize {
        self.learners.len()
    }
}

impl Classifier for BoostModel {
    /// Normalized alpha-weighted hard votes: score(c) sums the alphas of
    /// learners whose argmax is c.
    fn predict_proba(&self, sample: &[f64]) -> [f64; NUM_CLASSES] {
        let mut scores = [0.0; NUM_CLASSES];
        for (learner, &alpha) in self.learners.iter().zip(&self.alphas) {
            let vote = argmax_label(&learner.predict_proba(sample));
            scores[vote.code()] += alpha;
        }
        let total: f64 = scores.iter().sum();
        if total > 0.0 {
            for s in scores.iter_mut() {
                *s /= total;
            }
        }
        scores
    }
}

/// SAMME learner weight for a weighted error rate and K classes. Positive
/// iff err < (K-1)/K, i.e. the learner beats chance.
pub fn samme_alpha(err: f64, k: usize) -> f64 {
    ((1.0 - err) / err).ln() + ((k - 1) as f64).ln()
}

fn capped_alpha(k: usize) -> f64 {
    (1e10f64).ln() + ((k - 1) as f64).ln()
}

/// Per-round diagnostics, mostly for invariant checks.
#[derive(Debug, Clone, Default)]
pub struct BoostTrace {
    /// Weighted error of every fitted round (including skipped ones).
    pub round_errors: Vec<f64>,
    /// Sum of the sample weights after each retained round's reweighting.
    pub weight_sums: Vec<f64>,
    /// Whether each fitted round was retained.
    pub retained: Vec<bool>,
}

pub fn fit_adaboost(
    train: &Dataset,
    cfg: &BoostConfig,
    seed: u64,
) -> Result<BoostModel> {
    fit_adaboost_with_trace(train, cfg, seed).map(|(model, _)| model)
}

pub fn fit_adaboost_with_trace(
    train: &Dataset,
    cfg: &BoostConfig,
    seed: u64,
) -> Result<(BoostModel, BoostTrace)> {
    if train.is_empty() {
        return Err(Error::Fit("cannot boost on an empty dataset".into()));
    }
    if cfg.n_rounds < 1 {
        return Err(Error::Config("boosting needs at least one round".into()));
    }
    cfg.tree.validate()?;

    let n = train.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut learners = Vec::new();
    let mut alphas = Vec::new();
    let mut trace = BoostTrace::default();

    for round in 0..cfg.n_rounds {
        let tree_seed = seeding::derive(seed, &[SALT_BOOST, round as u64]);
        let learner = fit_tree(train, Some(&weights), &cfg.tree, tree_seed)?;

        let misclassified: Vec<bool> = (0..n)
            .map(|i| learner.predict(train.row(i)) != train.label(i))
            .collect();
        let err: f64 = weights
            .iter()
            .zip(&misclassified)
            .filter(|(_, &m)| m)
            .map(|(&w, _)| w)
            .sum();
        trace.round_errors.push(err);

        if err <= PERFECT_ERR {
            learners.push(learner);
            alphas.push(capped_alpha(NUM_CLASSES));
            trace.retained.push(true);
            trace.weight_sums.push(weights.iter().sum());
            break;
        }

        let alpha = samme_alpha(err, NUM_CLASSES);
        if alpha <= 0.0 {
            trace.retained.push(false);
            continue;
        }

        for (w, &m) in weights.iter_mut().zip(&misclassified) {
            if m {
                *w *= alpha.exp();
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        trace.weight_sums.push(weights.iter().sum());
        trace.retained.push(true);
        learners.push(learner);
        alphas.push(alpha);
    }

    if learners.is_empty() {
        return Err(Error::Fit(
            "every boosting round was rejected (weak learners no better than chance); \
             try deeper base trees"
                .into(),
        ));
    }
    Ok((BoostModel { learners, alphas }, trace))
}

/// Predicted label for a sample, with the boosting tie rule (lowest class
/// code wins on equal vote mass).
pub fn predict_adaboost(model: &BoostModel, sample: &[f64]) -> RiskLabel {
    model.predict(sample)
}
