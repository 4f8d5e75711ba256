//! Core vocabulary: risk labels, the electrode/band feature schema, and the
//! dataset container everything else flows through.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of risk classes.
pub const NUM_CLASSES: usize = 4;
/// Number of feature columns (5 electrodes x 5 bands).
pub const NUM_FEATURES: usize = 25;

/// Risk category assigned to each sample. Integer codes 0..3 in this order
/// fix confusion-matrix axes and tie-breaking everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskLabel {
    #[serde(rename = "High-Risk")]
    HighRisk,
    #[serde(rename = "Medium-Risk")]
    MediumRisk,
    #[serde(rename = "Low-Risk")]
    LowRisk,
    #[serde(rename = "Normal")]
    Normal,
}

impl RiskLabel {
    pub const ALL: [RiskLabel; NUM_CLASSES] = [
        RiskLabel::HighRisk,
        RiskLabel::MediumRisk,
        RiskLabel::LowRisk,
        RiskLabel::Normal,
    ];

    pub fn code(self) -> usize {
        match self {
            RiskLabel::HighRisk => 0,
            RiskLabel::MediumRisk => 1,
            RiskLabel::LowRisk => 2,
            RiskLabel::Normal => 3,
        }
    }

    pub fn from_code(code: usize) -> Result<Self> {
        RiskLabel::ALL
            .get(code)
            .copied()
            .ok_or_else(|| Error::UnknownLabel {
                token: format!("class code {code}"),
            })
    }

    /// Canonical spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            RiskLabel::HighRisk => "High-Risk",
            RiskLabel::MediumRisk => "Medium-Risk",
            RiskLabel::LowRisk => "Low-Risk",
            RiskLabel::Normal => "Normal",
        }
    }

    /// Case-insensitive parse, tolerant of hyphen/space/underscore
    /// separators ("High-Risk", "high risk", "HIGH_RISK" all match).
    pub fn parse(text: &str) -> Result<Self> {
        let normalized: String = text
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match normalized.as_str() {
            "highrisk" => Ok(RiskLabel::HighRisk),
            "mediumrisk" => Ok(RiskLabel::MediumRisk),
            "lowrisk" => Ok(RiskLabel::LowRisk),
            "normal" => Ok(RiskLabel::Normal),
            _ => Err(Error::UnknownLabel {
                token: text.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for RiskLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps the 25 feature slots onto (electrode, band) pairs.
///
/// Feature index `i` belongs to electrode `i / 5` and band `i % 5`. The
/// electrode names default to the 5-channel consumer montage (AF3, AF4, T7,
/// T8, Pz) but are configurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    electrodes: Vec<String>,
    bands: Vec<String>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema {
            electrodes: ["AF3", "AF4", "T7", "T8", "Pz"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            bands: ["Theta", "Alpha", "LowBeta", "HighBeta", "Gamma"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl FeatureSchema {
    pub fn new(electrodes: Vec<String>, bands: Vec<String>) -> Result<Self> {
        if electrodes.len() != 5 || bands.len() != 5 {
            return Err(Error::Config(format!(
                "schema needs 5 electrodes and 5 bands, got {} and {}",
                electrodes.len(),
                bands.len()
            )));
        }
        for names in [&electrodes, &bands] {
            for (i, a) in names.iter().enumerate() {
                if names[..i].contains(a) {
                    return Err(Error::Config(format!("duplicate schema name {a:?}")));
                }
            }
        }
        Ok(FeatureSchema { electrodes, bands })
    }

    pub fn electrodes(&self) -> &[String] {
        &self.electrodes
    }

    pub fn bands(&self) -> &[String] {
        &self.bands
    }

    /// (electrode, band) pair of a feature index.
    pub fn feature_location(&self, index: usize) -> Result<(&str, &str)> {
        if index >= NUM_FEATURES {
            return Err(Error::FeatureIndexOutOfRange {
                index,
                count: NUM_FEATURES,
            });
        }
        Ok((&self.electrodes[index / 5], &self.bands[index % 5]))
    }

    /// "Electrode_Band" column name for CSV headers and reports.
    pub fn feature_name(&self, index: usize) -> Result<String> {
        let (e, b) = self.feature_location(index)?;
        Ok(format!("{e}_{b}"))
    }

    /// Indices of the 5 features recorded by the named electrode.
    pub fn electrode_features(&self, electrode: &str) -> Result<[usize; 5]> {
        let pos = self
            .electrodes
            .iter()
            .position(|e| e == electrode)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown electrode {electrode:?}; schema has {:?}",
                    self.electrodes
                ))
            })?;
        Ok([pos * 5, pos * 5 + 1, pos * 5 + 2, pos * 5 + 3, pos * 5 + 4])
    }
}

/// In-memory dataset: N x 25 feature matrix (row major) plus per-row labels.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<RiskLabel>,
    schema: FeatureSchema,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<RiskLabel>, schema: FeatureSchema) -> Result<Self> {
        if features.len() != labels.len() * NUM_FEATURES {
            return Err(Error::InvalidDataset(format!(
                "feature matrix has {} values but {} labels require {}",
                features.len(),
                labels.len(),
                labels.len() * NUM_FEATURES
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature value at row {} column {}",
                pos / NUM_FEATURES,
                pos % NUM_FEATURES
            )));
        }
        Ok(Dataset {
            features,
            labels,
            schema,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * NUM_FEATURES..(i + 1) * NUM_FEATURES]
    }

    pub fn label(&self, i: usize) -> RiskLabel {
        self.labels[i]
    }

    pub fn labels(&self) -> &[RiskLabel] {
        &self.labels
    }

    pub fn feature_matrix(&self) -> &[f64] {
        &self.features
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Copy with the label vector replaced; features are shared bit-identical.
    pub(crate) fn with_labels(&self, labels: Vec<RiskLabel>) -> Result<Self> {
        Dataset::new(self.features.clone(), labels, self.schema.clone())
    }

    /// Copy containing only the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * NUM_FEATURES);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidDataset(format!(
                    "row index {i} out of range for dataset of {} rows",
                    self.len()
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(features, labels, self.schema.clone())
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for &l in &self.labels {
            counts[l.code()] += 1;
        }
        counts
    }
}
