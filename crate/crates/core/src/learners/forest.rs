//! Random forest: bagged CART trees with per-node feature subsampling,
//! averaged for prediction. Per-tree seeds come from the master seed so the
//! fitted forest is identical under any execution schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::seeding::{self, SALT_FOREST};

use super::tree::{fit_tree, FeatureSubsample, TreeConfig, TreeModel};
use super::Classifier;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub tree: TreeConfig,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            tree: TreeConfig {
                max_depth: None,
                min_samples_split: 2,
                feature_subsample: FeatureSubsample::Sqrt,
            },
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

impl Classifier for ForestModel {
    /// Arithmetic mean of the member trees' leaf distributions.
    fn predict_proba(&self, sample: &[f64]) -> [f64; NUM_CLASSES] {
        let mut dist = [0.0; NUM_CLASSES];
        for tree in &self.trees {
            let d = tree.predict_proba(sample);
            for c in 0..NUM_CLASSES {
                dist[c] += d[c];
            }
        }
        let n = self.trees.len() as f64;
        for v in dist.iter_mut() {
            *v /= n;
        }
        dist
    }
}

/// Fit `cfg.n_trees` trees, each on a bootstrap resample (N draws with
/// replacement) when `cfg.bootstrap` is set.
pub fn fit_forest(
    train: &Dataset,
    cfg: &ForestConfig,
    seed: u64,
    par: Parallelism,
) -> Result<ForestModel> {
    if cfg.n_trees < 1 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    if train.is_empty() {
        return Err(Error::Fit("cannot fit a forest on an empty dataset".into()));
    }
    cfg.tree.validate()?;

    let results = map_indexed(par, cfg.n_trees, |t| -> Result<TreeModel> {
        let tree_seed = seeding::derive(seed, &[SALT_FOREST, t as u64, 1]);
        if cfg.bootstrap {
            let mut rng = seeding::rng(seed, &[SALT_FOREST, t as u64, 0]);
            let indices: Vec<usize> = (0..train.len())
                .map(|_| rng.gen_range(0..train.len()))
                .collect();
            let sample = train.subset(&indices)?;
            fit_tree(&sample, None, &cfg.tree, tree_seed)
        } else {
            fit_tree(train, None, &cfg.tree, tree_seed)
        }
    });
    let trees = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ForestModel { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{generate_synthetic, stratified_split, SyntheticSpec};
    use crate::domain::NUM_FEATURES;

    #[test]
    fn single_tree_no_bootstrap_reduces_to_the_tree() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(10, 0.5, None), 4).unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            tree: TreeConfig::default(),
        };
        let forest = fit_forest(&data, &cfg, 9, Parallelism::Sequential).unwrap();
        let tree = fit_tree(
            &data,
            None,
            &cfg.tree,
            seeding::derive(9, &[SALT_FOREST, 0, 1]),
        )
        .unwrap();
        for i in 0..data.len() {
            assert_eq!(forest.predict_proba(data.row(i)), tree.predict_proba(data.row(i)));
        }
    }

    #[test]
    fn forest_is_deterministic_across_schedules() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(15, 1.0, None), 5).unwrap();
        let cfg = ForestConfig {
            n_trees: 12,
            ..ForestConfig::default()
        };
        let seq = fit_forest(&data, &cfg, 3, Parallelism::Sequential).unwrap();
        let par = fit_forest(&data, &cfg, 3, Parallelism::Rayon).unwrap();
        assert_eq!(seq, par);
        let again = fit_forest(&data, &cfg, 3, Parallelism::Rayon).unwrap();
        assert_eq!(par, again);
    }

    #[test]
    fn mean_of_two_disagreeing_trees() {
        // Construct a forest by hand from two single-leaf trees.
        use crate::domain::RiskLabel;
        use crate::learners::tree::test_util::dataset_from_columns;
        let a = fit_tree(
            &dataset_from_columns(&[(0, vec![1.0])], vec![RiskLabel::HighRisk]),
            None,
            &TreeConfig::default(),
            0,
        )
        .unwrap();
        let b = fit_tree(
            &dataset_from_columns(&[(0, vec![1.0])], vec![RiskLabel::MediumRisk]),
            None,
            &TreeConfig::default(),
            0,
        )
        .unwrap();
        let forest = ForestModel { trees: vec![a, b] };
        assert_eq!(forest.predict_proba(&[0.0; NUM_FEATURES]), [0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn prediction_distributions_sum_to_one() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(20, 1.0, None), 6).unwrap();
        let split = stratified_split(&data, 0.8, 1).unwrap();
        let forest = fit_forest(&split.train, &ForestConfig { n_trees: 25, ..Default::default() }, 2, Parallelism::default()).unwrap();
        for i in 0..split.test.len() {
            let dist = forest.predict_proba(split.test.row(i));
            let sum: f64 = dist.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(dist.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn rejects_zero_trees() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(2, 1.0, None), 0).unwrap();
        let cfg = ForestConfig { n_trees: 0, ..Default::default() };
        assert!(fit_forest(&data, &cfg, 0, Parallelism::Sequential).is_err());
    }
}
