//! Permutation feature importance and per-electrode aggregation.
//!
//! Importance of a feature is the drop in accuracy when that feature's
//! column is shuffled on the evaluation set, averaged over seeded repeats.
//! Negative values are possible and are reported as-is.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, FeatureSchema, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::learners::Classifier;
use crate::metrics::{accuracy, ConfusionMatrix};
use crate::seeding::{self, SALT_IMPORTANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    /// Mean accuracy drop over repeats.
    pub mean: f64,
    /// Sample standard deviation over repeats (0 when repeats == 1).
    pub stddev: f64,
}

/// Which sweep cell an importance report belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceContext {
    pub model: String,
    pub scenario: String,
    pub rate_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub per_feature: Vec<FeatureImportance>,
    pub repeats: usize,
    pub seed: u64,
    pub baseline_accuracy: f64,
    pub context: Option<ImportanceContext>,
}

fn model_accuracy(model: &dyn Classifier, eval: &Dataset) -> Result<f64> {
    let predictions: Vec<_> = (0..eval.len()).map(|i| model.predict(eval.row(i))).collect();
    accuracy(&ConfusionMatrix::from_pairs(eval.labels(), &predictions)?)
}

/// Accuracy with column `feature` read through the row permutation `perm`.
fn permuted_accuracy(
    model: &dyn Classifier,
    eval: &Dataset,
    feature: usize,
    perm: &[usize],
) -> Result<f64> {
    let mut buffer = vec![0.0; NUM_FEATURES];
    let predictions: Vec<_> = (0..eval.len())
        .map(|i| {
            buffer.copy_from_slice(eval.row(i));
            buffer[feature] = eval.row(perm[i])[feature];
            model.predict(&buffer)
        })
        .collect();
    accuracy(&ConfusionMatrix::from_pairs(eval.labels(), &predictions)?)
}

/// Permutation importance of all 25 features over `repeats` seeded shuffles.
/// Each (feature, repeat) cell derives its own seed, so results do not
/// depend on the execution schedule. The eval set is never mutated.
pub fn permutation_importance(
    model: &dyn Classifier,
    eval: &Dataset,
    repeats: usize,
    seed: u64,
    par: Parallelism,
) -> Result<ImportanceReport> {
    if eval.is_empty() {
        return Err(Error::Metrics("permutation importance needs a nonempty eval set".into()));
    }
    if repeats < 1 {
        return Err(Error::Config("importance repeats must be >= 1".into()));
    }

    let baseline = model_accuracy(model, eval)?;
    let cells = map_indexed(par, NUM_FEATURES * repeats, |cell| -> Result<f64> {
        let feature = cell / repeats;
        let repeat = cell % repeats;
        let mut rng = seeding::rng(seed, &[SALT_IMPORTANCE, feature as u64, repeat as u64]);
        let mut perm: Vec<usize> = (0..eval.len()).collect();
        perm.shuffle(&mut rng);
        Ok(baseline - permuted_accuracy(model, eval, feature, &perm)?)
    });
    let drops = cells.into_iter().collect::<Result<Vec<f64>>>()?;

    let per_feature = (0..NUM_FEATURES)
        .map(|j| {
            let samples = &drops[j * repeats..(j + 1) * repeats];
            let mean = samples.iter().sum::<f64>() / repeats as f64;
            let stddev = if repeats > 1 {
                let var = samples.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                    / (repeats - 1) as f64;
                var.sqrt()
            } else {
                0.0
            };
            FeatureImportance { mean, stddev }
        })
        .collect();

    Ok(ImportanceReport {
        per_feature,
        repeats,
        seed,
        baseline_accuracy: baseline,
        context: None,
    })
}

/// Per-electrode score: sum of the mean importances of its 5 band features,
/// in schema electrode order.
pub fn aggregate_importance_by_electrode(
    report: &ImportanceReport,
    schema: &FeatureSchema,
) -> Result<Vec<(String, f64)>> {
    if report.per_feature.len() != NUM_FEATURES {
        return Err(Error::Metrics(format!(
            "importance report covers {} features, expected {}",
            report.per_feature.len(),
            NUM_FEATURES
        )));
    }
    schema
        .electrodes()
        .iter()
        .map(|electrode| {
            let score = schema
                .electrode_features(electrode)?
                .iter()
                .map(|&j| report.per_feature[j].mean)
                .sum();
            Ok((electrode.clone(), score))
        })
        .collect()
}

/// Long-format CSV of the report: one row per feature with its electrode,
/// band, mean and spread, plus the cell context.
pub fn importance_to_csv(report: &ImportanceReport, schema: &FeatureSchema) -> Result<String> {
    let mut out = String::from("feature,electrode,band,mean,stddev,model,scenario,rate\n");
    let (model, scenario, rate) = match &report.context {
        Some(ctx) => (ctx.model.as_str(), ctx.scenario.as_str(), format_rate(ctx.rate_percent)),
        None => ("", "", String::new()),
    };
    for (j, fi) in report.per_feature.iter().enumerate() {
        let (electrode, band) = schema.feature_location(j)?;
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{},{}\n",
            schema.feature_name(j)?,
            electrode,
            band,
            fi.mean,
            fi.stddev,
            model,
            scenario,
            rate
        ));
    }
    Ok(out)
}

/// Render a percent rate without a trailing ".0" for whole numbers.
pub fn format_rate(rate: f64) -> String {
    if rate.fract() == 0.0 {
        format!("{}", rate as i64)
    } else {
        format!("{rate}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{generate_synthetic, SyntheticSpec};
    use crate::domain::{RiskLabel, NUM_CLASSES};
    use crate::learners::tree::test_util::dataset_from_columns;
    use crate::learners::{fit_tree, TreeConfig};

    struct ConstantModel;
    impl Classifier for ConstantModel {
        fn predict_proba(&self, _sample: &[f64]) -> [f64; NUM_CLASSES] {
            [1.0, 0.0, 0.0, 0.0]
        }
    }

    #[test]
    fn constant_model_has_zero_importance_everywhere() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(5, 1.0, None), 1).unwrap();
        let report =
            permutation_importance(&ConstantModel, &data, 3, 0, Parallelism::default()).unwrap();
        for fi in &report.per_feature {
            assert_eq!(fi.mean, 0.0);
            assert_eq!(fi.stddev, 0.0);
        }
    }

    #[test]
    fn untested_feature_has_exactly_zero_importance() {
        // Tree splits only on feature 0; every other column is untouched.
        let data = dataset_from_columns(
            &[(0, vec![1.0, 2.0, 3.0, 4.0])],
            vec![
                RiskLabel::HighRisk,
                RiskLabel::HighRisk,
                RiskLabel::Normal,
                RiskLabel::Normal,
            ],
        );
        let tree = fit_tree(&data, None, &TreeConfig::default(), 0).unwrap();
        let report = permutation_importance(&tree, &data, 4, 7, Parallelism::default()).unwrap();
        for (j, fi) in report.per_feature.iter().enumerate() {
            if j != 0 {
                assert_eq!(fi.mean, 0.0, "feature {j}");
            }
        }
        assert!(report.per_feature[0].mean > 0.0);
    }

    #[test]
    fn dominant_feature_ranks_first() {
        // Single informative column: class-dependent values on feature 3.
        let labels: Vec<RiskLabel> = (0..40).map(|i| RiskLabel::ALL[i % 4]).collect();
        let values: Vec<f64> = labels.iter().map(|l| l.code() as f64 * 10.0).collect();
        let data = dataset_from_columns(&[(3, values)], labels);
        let tree = fit_tree(&data, None, &TreeConfig::default(), 0).unwrap();
        let report = permutation_importance(&tree, &data, 5, 3, Parallelism::default()).unwrap();
        let best = report
            .per_feature
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.mean.partial_cmp(&b.1.mean).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, 3);
        assert!(report.per_feature[3].mean > 0.0);
    }

    #[test]
    fn determinism_across_schedules() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(10, 1.0, None), 2).unwrap();
        let tree = fit_tree(&data, None, &TreeConfig::default(), 1).unwrap();
        let seq = permutation_importance(&tree, &data, 3, 5, Parallelism::Sequential).unwrap();
        let par = permutation_importance(&tree, &data, 3, 5, Parallelism::Rayon).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn electrode_aggregation_sums_features() {
        let schema = FeatureSchema::default();
        let report = ImportanceReport {
            per_feature: (0..NUM_FEATURES)
                .map(|_| FeatureImportance {
                    mean: 0.01,
                    stddev: 0.0,
                })
                .collect(),
            repeats: 1,
            seed: 0,
            baseline_accuracy: 1.0,
            context: None,
        };
        let scores = aggregate_importance_by_electrode(&report, &schema).unwrap();
        assert_eq!(scores.len(), 5);
        for (_, score) in &scores {
            assert!((score - 0.05).abs() < 1e-12);
        }

        // All importance on one electrode stays local to it.
        let mut concentrated = report.clone();
        for fi in concentrated.per_feature.iter_mut() {
            fi.mean = 0.0;
        }
        for j in 20..25 {
            concentrated.per_feature[j].mean = 0.2;
        }
        let scores = aggregate_importance_by_electrode(&concentrated, &schema).unwrap();
        assert_eq!(scores[4].0, "Pz");
        assert!((scores[4].1 - 1.0).abs() < 1e-12);
        for (_, score) in &scores[..4] {
            assert_eq!(*score, 0.0);
        }
    }

    #[test]
    fn electrode_totals_match_feature_totals() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(10, 1.0, Some("Pz".into())), 9).unwrap();
        let tree = fit_tree(&data, None, &TreeConfig::default(), 4).unwrap();
        let report = permutation_importance(&tree, &data, 2, 6, Parallelism::default()).unwrap();
        let scores = aggregate_importance_by_electrode(&report, data.schema()).unwrap();
        let electrode_total: f64 = scores.iter().map(|(_, s)| s).sum();
        let feature_total: f64 = report.per_feature.iter().map(|f| f.mean).sum();
        assert!((electrode_total - feature_total).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = generate_synthetic(&SyntheticSpec::well_separated(2, 1.0, None), 0).unwrap();
        let tree = fit_tree(&data, None, &TreeConfig::default(), 0).unwrap();
        assert!(permutation_importance(&tree, &data, 0, 0, Parallelism::default()).is_err());
        let report = ImportanceReport {
            per_feature: vec![],
            repeats: 1,
            seed: 0,
            baseline_accuracy: 0.0,
            context: None,
        };
        assert!(aggregate_importance_by_electrode(&report, data.schema()).is_err());
    }
}
