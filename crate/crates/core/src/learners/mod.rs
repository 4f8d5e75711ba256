//! From-scratch multiclass classifiers: CART decision tree, random forest,
//! and SAMME AdaBoost. All expose class-probability prediction so log loss
//! is computable downstream.

pub mod adaboost;
pub mod forest;
pub mod tree;

pub use adaboost::{fit_adaboost, fit_adaboost_with_trace, samme_alpha, BoostConfig, BoostModel, BoostTrace};
pub use forest::{fit_forest, ForestConfig, ForestModel};
pub use tree::{find_best_split, fit_tree, gini_impurity, FeatureSubsample, Split, TreeConfig, TreeModel};

use crate::domain::{RiskLabel, NUM_CLASSES};

/// Common prediction surface for all trained models.
pub trait Classifier: Send + Sync {
    fn predict_proba(&self, sample: &[f64]) -> [f64; NUM_CLASSES];

    /// Argmax of the predicted distribution; ties broken by lowest class code.
    fn predict(&self, sample: &[f64]) -> RiskLabel {
        let dist = self.predict_proba(sample);
        argmax_label(&dist)
    }
}

/// Lowest-code argmax over a class distribution.
pub fn argmax_label(dist: &[f64; NUM_CLASSES]) -> RiskLabel {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if dist[c] > dist[best] {
            best = c;
        }
    }
    RiskLabel::ALL[best]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_by_lowest_code() {
        assert_eq!(argmax_label(&[0.25, 0.25, 0.25, 0.25]), RiskLabel::HighRisk);
        assert_eq!(argmax_label(&[0.1, 0.4, 0.4, 0.1]), RiskLabel::MediumRisk);
        assert_eq!(argmax_label(&[0.0, 0.0, 0.0, 1.0]), RiskLabel::Normal);
    }
}
