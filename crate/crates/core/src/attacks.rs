//! Label-flipping poisoning of the training partition.
//!
//! Two scenarios: uniform random replacement among the other three classes,
//! and a fixed class-to-class mapping (default: severity inversion). Both
//! leave the feature matrix untouched and emit an audit trail of
//! `FlipRecord`s.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::round_half_up;
use crate::domain::{Dataset, RiskLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seeding::{self, SALT_POISON_FLIP, SALT_POISON_SELECT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoisonScenario {
    RandomFlip,
    TargetedFlip,
}

impl PoisonScenario {
    pub fn as_str(self) -> &'static str {
        match self {
            PoisonScenario::RandomFlip => "random",
            PoisonScenario::TargetedFlip => "targeted",
        }
    }
}

/// Total label-to-label mapping with no fixed points, used by the targeted
/// scenario. Indexed by class code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipMap([RiskLabel; NUM_CLASSES]);

impl FlipMap {
    pub fn new(targets: [RiskLabel; NUM_CLASSES]) -> Result<Self> {
        for (code, &target) in targets.iter().enumerate() {
            if target.code() == code {
                return Err(Error::Config(format!(
                    "targeted flip mapping has a fixed point at {}",
                    target
                )));
            }
        }
        Ok(FlipMap(targets))
    }

    /// Severity inversion: High-Risk <-> Normal, Medium-Risk <-> Low-Risk.
    /// An involution, so applying it twice restores the original labels.
    pub fn severity_inversion() -> Self {
        FlipMap([
            RiskLabel::Normal,
            RiskLabel::LowRisk,
            RiskLabel::MediumRisk,
            RiskLabel::HighRisk,
        ])
    }

    pub fn apply(&self, label: RiskLabel) -> RiskLabel {
        self.0[label.code()]
    }
}

impl Default for FlipMap {
    fn default() -> Self {
        FlipMap::severity_inversion()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoisonConfig {
    pub scenario: PoisonScenario,
    /// Fraction of training rows to flip, in [0,1].
    pub rate: f64,
    /// Mapping for the targeted scenario; ignored by random flip.
    #[serde(default)]
    pub mapping: Option<FlipMap>,
    pub seed: u64,
}

impl PoisonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::Config(format!(
                "poison rate must be in [0,1], got {}",
                self.rate
            )));
        }
        Ok(())
    }
}

/// One flipped training row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub row_index: usize,
    pub original: RiskLabel,
    pub flipped: RiskLabel,
}

/// Choose exactly `round_half_up(rate * n_train)` distinct row indices,
/// uniformly without replacement, sorted ascending.
pub fn select_poison_indices(n_train: usize, rate: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Config(format!(
            "poison rate must be in [0,1], got {rate}"
        )));
    }
    let k = round_half_up(rate * n_train as f64).min(n_train);
    let mut rng = seeding::rng(seed, &[SALT_POISON_SELECT]);
    let mut indices = rand::seq::index::sample(&mut rng, n_train, k).into_vec();
    indices.sort_unstable();
    Ok(indices)
}

fn check_indices(train: &Dataset, indices: &[usize]) -> Result<()> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= train.len()) {
        return Err(Error::InvalidDataset(format!(
            "poison index {bad} out of range for training set of {} rows",
            train.len()
        )));
    }
    Ok(())
}

/// Scenario A: each selected row gets a label drawn uniformly from the three
/// classes other than its original.
pub fn flip_random(
    train: &Dataset,
    indices: &[usize],
    seed: u64,
) -> Result<(Dataset, Vec<FlipRecord>)> {
    check_indices(train, indices)?;
    let mut rng = seeding::rng(seed, &[SALT_POISON_FLIP]);
    let mut labels = train.labels().to_vec();
    let mut records = Vec::with_capacity(indices.len());
    for &i in indices {
        let original = labels[i];
        let alternatives: Vec<RiskLabel> = RiskLabel::ALL
            .iter()
            .copied()
            .filter(|&l| l != original)
            .collect();
        let flipped = alternatives[rng.gen_range(0..alternatives.len())];
        labels[i] = flipped;
        records.push(FlipRecord {
            row_index: i,
            original,
            flipped,
        });
    }
    Ok((train.with_labels(labels)?, records))
}

/// Scenario B: each selected row gets `mapping[original]`. Deterministic
/// beyond index selection.
pub fn flip_targeted(
    train: &Dataset,
    indices: &[usize],
    mapping: &FlipMap,
) -> Result<(Dataset, Vec<FlipRecord>)> {
    check_indices(train, indices)?;
    let mut labels = train.labels().to_vec();
    let mut records = Vec::with_capacity(indices.len());
    for &i in indices {
        let original = labels[i];
        let flipped = mapping.apply(original);
        labels[i] = flipped;
        records.push(FlipRecord {
            row_index: i,
            original,
            flipped,
        });
    }
    Ok((train.with_labels(labels)?, records))
}

/// Select indices per the config's rate and apply its scenario.
pub fn apply_poison(train: &Dataset, cfg: &PoisonConfig) -> Result<(Dataset, Vec<FlipRecord>)> {
    cfg.validate()?;
    let indices = select_poison_indices(train.len(), cfg.rate, cfg.seed)?;
    match cfg.scenario {
        PoisonScenario::RandomFlip => flip_random(train, &indices, cfg.seed),
        PoisonScenario::TargetedFlip => {
            let mapping = cfg.mapping.unwrap_or_default();
            flip_targeted(train, &indices, &mapping)
        }
    }
}

/// Shuffle helper kept here so scenario code and tests share one source of
/// randomness semantics.
#[allow(dead_code)]
fn shuffle_in_place<T>(items: &mut [T], rng: &mut impl Rng) {
    items.shuffle(rng);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{generate_synthetic, SyntheticSpec};

    fn sample_data(per_class: usize) -> Dataset {
        generate_synthetic(&SyntheticSpec::well_separated(per_class, 1.0, None), 3).unwrap()
    }

    #[test]
    fn selection_counts_follow_round_half_up() {
        assert_eq!(select_poison_indices(100, 0.05, 1).unwrap().len(), 5);
        assert_eq!(select_poison_indices(100, 0.0, 1).unwrap().len(), 0);
        assert_eq!(select_poison_indices(10, 0.75, 1).unwrap().len(), 8);
    }

    #[test]
    fn selection_is_sorted_distinct_and_deterministic() {
        let a = select_poison_indices(50, 0.5, 7).unwrap();
        let b = select_poison_indices(50, 0.5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&i| i < 50));
    }

    #[test]
    fn random_flip_noop_on_empty_selection() {
        let data = sample_data(5);
        let (poisoned, records) = flip_random(&data, &[], 1).unwrap();
        assert!(records.is_empty());
        assert_eq!(poisoned.labels(), data.labels());
    }

    #[test]
    fn random_flip_changes_every_selected_label() {
        let data = sample_data(5);
        let all: Vec<usize> = (0..data.len()).collect();
        let (poisoned, records) = flip_random(&data, &all, 42).unwrap();
        assert_eq!(records.len(), data.len());
        for r in &records {
            assert_ne!(r.original, r.flipped);
            assert_eq!(poisoned.label(r.row_index), r.flipped);
        }
        // Features stay bit-identical.
        assert_eq!(poisoned.feature_matrix(), data.feature_matrix());
    }

    #[test]
    fn random_flip_partial_selection_audits_correctly() {
        let data = sample_data(5); // n = 20
        let indices = select_poison_indices(data.len(), 0.25, 42).unwrap();
        assert_eq!(indices.len(), 5);
        let (poisoned, records) = flip_random(&data, &indices, 42).unwrap();
        assert_eq!(records.len(), 5);
        for i in 0..data.len() {
            if indices.contains(&i) {
                assert_ne!(poisoned.label(i), data.label(i));
            } else {
                assert_eq!(poisoned.label(i), data.label(i));
            }
        }
    }

    #[test]
    fn random_flip_rejects_out_of_range_index() {
        let data = sample_data(2);
        assert!(flip_random(&data, &[99], 0).is_err());
    }

    #[test]
    fn targeted_flip_applies_mapping() {
        let data = sample_data(2);
        let mapping = FlipMap::severity_inversion();
        let all: Vec<usize> = (0..data.len()).collect();
        let (poisoned, records) = flip_targeted(&data, &all, &mapping).unwrap();
        for r in &records {
            assert_eq!(r.flipped, mapping.apply(r.original));
        }
        // The default map is an involution: applying twice restores labels.
        let (restored, _) = flip_targeted(&poisoned, &all, &mapping).unwrap();
        assert_eq!(restored.labels(), data.labels());
    }

    #[test]
    fn targeted_flip_empty_selection_is_identity() {
        let data = sample_data(2);
        let (out, records) = flip_targeted(&data, &[], &FlipMap::default()).unwrap();
        assert!(records.is_empty());
        assert_eq!(out.labels(), data.labels());
    }

    #[test]
    fn flip_map_rejects_fixed_points() {
        let err = FlipMap::new([
            RiskLabel::HighRisk, // fixed point at code 0
            RiskLabel::LowRisk,
            RiskLabel::MediumRisk,
            RiskLabel::HighRisk,
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn poison_config_rejects_bad_rate() {
        let cfg = PoisonConfig {
            scenario: PoisonScenario::RandomFlip,
            rate: 1.5,
            mapping: None,
            seed: 0,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn apply_poison_is_deterministic() {
        let data = sample_data(10);
        let cfg = PoisonConfig {
            scenario: PoisonScenario::RandomFlip,
            rate: 0.5,
            mapping: None,
            seed: 11,
        };
        let (a, ra) = apply_poison(&data, &cfg).unwrap();
        let (b, rb) = apply_poison(&data, &cfg).unwrap();
        assert_eq!(a.labels(), b.labels());
        assert_eq!(ra, rb);
    }
}
