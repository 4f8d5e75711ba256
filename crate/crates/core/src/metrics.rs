//! Multiclass evaluation: confusion matrix, accuracy, precision/recall/F1
//! (macro and weighted), and log loss.

use serde::{Deserialize, Serialize};

use crate::domain::{RiskLabel, NUM_CLASSES};
use crate::error::{Error, Result};

pub const DEFAULT_LOG_LOSS_EPSILON: f64 = 1e-15;

/// 4x4 counts; rows are true class codes, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_pairs(y_true: &[RiskLabel], y_pred: &[RiskLabel]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Metrics(format!(
                "{} true labels vs {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::Metrics("no samples to evaluate".into()));
        }
        let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
        for (t, p) in y_true.iter().zip(y_pred) {
            counts[t.code()][p.code()] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }
}

/// Fraction of correctly classified samples.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Metrics("accuracy of an empty confusion matrix".into()));
    }
    Ok(cm.trace() as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Macro,
    Weighted,
}

impl Averaging {
    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::Macro => "macro",
            Averaging::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub per_class: [PrfScores; NUM_CLASSES],
    pub aggregate: PrfScores,
    /// Classes whose precision or recall had a zero denominator (no
    /// predictions or no true samples); their scores are 0, not NaN.
    pub degenerate_classes: [bool; NUM_CLASSES],
    pub mode: Averaging,
}

/// Per-class precision/recall/F1 plus the macro or weighted aggregate.
pub fn precision_recall_f1(cm: &ConfusionMatrix, mode: Averaging) -> Result<PrfReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Metrics("metrics of an empty confusion matrix".into()));
    }

    let mut per_class = [PrfScores {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    }; NUM_CLASSES];
    let mut degenerate = [false; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        let tp = cm.counts()[c][c] as f64;
        let col = cm.col_sum(c) as f64;
        let row = cm.row_sum(c) as f64;
        if col == 0.0 || row == 0.0 {
            degenerate[c] = true;
        }
        let precision = if col > 0.0 { tp / col } else { 0.0 };
        let recall = if row > 0.0 { tp / row } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c] = PrfScores {
            precision,
            recall,
            f1,
        };
    }

    let aggregate = match mode {
        Averaging::Macro => {
            let k = NUM_CLASSES as f64;
            PrfScores {
                precision: per_class.iter().map(|s| s.precision).sum::<f64>() / k,
                recall: per_class.iter().map(|s| s.recall).sum::<f64>() / k,
                f1: per_class.iter().map(|s| s.f1).sum::<f64>() / k,
            }
        }
        Averaging::Weighted => {
            let n = total as f64;
            let mut agg = PrfScores {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            };
            for c in 0..NUM_CLASSES {
                let w = cm.row_sum(c) as f64 / n;
                agg.precision += w * per_class[c].precision;
                agg.recall += w * per_class[c].recall;
                agg.f1 += w * per_class[c].f1;
            }
            agg
        }
    };

    Ok(PrfReport {
        per_class,
        aggregate,
        degenerate_classes: degenerate,
        mode,
    })
}

/// Mean negative natural log of the probability assigned to the true class,
/// with probabilities clamped to [epsilon, 1-epsilon].
pub fn log_loss(y_true: &[RiskLabel], probabilities: &[[f64; NUM_CLASSES]], epsilon: f64) -> Result<f64> {
    if y_true.len() != probabilities.len() {
        return Err(Error::Metrics(format!(
            "{} labels vs {} probability rows",
            y_true.len(),
            probabilities.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Metrics("log loss of an empty sample set".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1e-6) {
        return Err(Error::Metrics(format!(
            "log loss epsilon must be in (0, 1e-6], got {epsilon}"
        )));
    }
    let mut sum = 0.0;
    for (i, (label, row)) in y_true.iter().zip(probabilities).enumerate() {
        let row_sum: f64 = row.iter().sum();
        if (row_sum - 1.0).abs() > 1e-6 {
            return Err(Error::Metrics(format!(
                "probability row {i} sums to {row_sum}, not 1"
            )));
        }
        let p = row[label.code()].clamp(epsilon, 1.0 - epsilon);
        sum -= p.ln();
    }
    Ok(sum / y_true.len() as f64)
}

/// One row of the sweep report: a (model, attack, rate) cell's metrics,
/// percentages in [0,100].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub scenario: String,
    pub rate_percent: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub log_loss: f64,
    pub averaging: Averaging,
}
