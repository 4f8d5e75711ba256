//! CSV loading, the stratified 80/20 split, and a seeded synthetic
//! generator standing in for the non-distributable source data.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, FeatureSchema, RiskLabel, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::seeding::{self, SALT_SPLIT, SALT_SYNTH};

pub const DEFAULT_LABEL_COLUMN: &str = "label";

/// Round-half-up count used for split quotas and poison counts.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Load a dataset from a CSV file with a header of 25 feature names plus a
/// label column named `label`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    load_dataset_with(path, DEFAULT_LABEL_COLUMN)
}

pub fn load_dataset_with(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file_err = |message: String| Error::DataFile {
        path: display.clone(),
        message,
    };

    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| file_err(format!("cannot open: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| file_err(format!("cannot read header: {e}")))?
        .clone();
    if headers.len() != NUM_FEATURES + 1 {
        return Err(file_err(format!(
            "expected {} columns (25 features + {label_column:?}), found {}",
            NUM_FEATURES + 1,
            headers.len()
        )));
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| file_err(format!("no {label_column:?} column in header")))?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2; // header is line 1
        let record = record.map_err(|e| file_err(format!("line {line}: {e}")))?;
        if record.len() != NUM_FEATURES + 1 {
            return Err(file_err(format!(
                "line {line}: expected {} columns, found {}",
                NUM_FEATURES + 1,
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                let label = RiskLabel::parse(field)
                    .map_err(|e| file_err(format!("line {line}: {e}")))?;
                labels.push(label);
            } else {
                let value: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| file_err(format!("line {line}: non-numeric feature {field:?}")))?;
                if !value.is_finite() {
                    return Err(file_err(format!(
                        "line {line}: non-finite feature {field:?}"
                    )));
                }
                features.push(value);
            }
        }
    }
    Dataset::new(features, labels, FeatureSchema::default())
        .map_err(|e| file_err(e.to_string()))
}

/// Write a dataset as CSV in the format `load_dataset` reads back.
pub fn write_dataset_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::DataFile {
            path: display.clone(),
            message: format!("cannot create: {e}"),
        })?;
    let mut header: Vec<String> = (0..NUM_FEATURES)
        .map(|i| data.schema().feature_name(i))
        .collect::<Result<_>>()?;
    header.push(DEFAULT_LABEL_COLUMN.to_string());
    let io_err = |e: csv::Error| Error::DataFile {
        path: display.clone(),
        message: e.to_string(),
    };
    writer.write_record(&header).map_err(io_err)?;
    for i in 0..data.len() {
        let mut record: Vec<String> = data.row(i).iter().map(|v| format!("{v}")).collect();
        record.push(data.label(i).as_str().to_string());
        writer.write_record(&record).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::io(display, e))
}

/// Outcome of a stratified train/test split.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub train_fraction: f64,
    /// Original row indices that went to each side.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Split per class: exactly `round_half_up(train_fraction * n_c)` samples of
/// each class go to train, chosen by seeded shuffle.
pub fn stratified_split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Stratification(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let mut by_class: [Vec<usize>; NUM_CLASSES] = Default::default();
    for i in 0..data.len() {
        by_class[data.label(i).code()].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {} has {} samples; stratified split needs at least 2 per class",
                RiskLabel::from_code(c)?,
                rows.len()
            )));
        }
    }

    let mut rng = seeding::rng(seed, &[SALT_SPLIT]);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for rows in by_class.iter_mut() {
        rows.shuffle(&mut rng);
        let quota = round_half_up(train_fraction * rows.len() as f64);
        train_indices.extend_from_slice(&rows[..quota]);
        test_indices.extend_from_slice(&rows[quota..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(SplitDataset {
        train: data.subset(&train_indices)?,
        test: data.subset(&test_indices)?,
        seed,
        train_fraction,
        train_indices,
        test_indices,
    })
}

/// Recipe for a class-conditional Gaussian dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub samples_per_class: usize,
    /// Per-class feature means, 4 rows of 25.
    pub class_means: Vec<Vec<f64>>,
    pub noise_stddev: f64,
    /// When set, the 5 mean entries of this electrode are scaled by
    /// `dominance_factor` to widen its class separation.
    pub dominant_electrode: Option<String>,
    pub dominance_factor: f64,
}

impl SyntheticSpec {
    /// Desk-scale default: weakly informative features everywhere with the
    /// class separation concentrated wherever `dominant_electrode` points.
    pub fn well_separated(
        samples_per_class: usize,
        noise_stddev: f64,
        dominant_electrode: Option<String>,
    ) -> Self {
        let step = 0.5;
        let class_means = (0..NUM_CLASSES)
            .map(|c| vec![step * c as f64; NUM_FEATURES])
            .collect();
        SyntheticSpec {
            samples_per_class,
            class_means,
            noise_stddev,
            dominant_electrode,
            dominance_factor: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_class < 1 {
            return Err(Error::Config("samples_per_class must be >= 1".into()));
        }
        if !(self.noise_stddev > 0.0) {
            return Err(Error::Config(format!(
                "noise_stddev must be > 0, got {}",
                self.noise_stddev
            )));
        }
        if self.class_means.len() != NUM_CLASSES
            || self.class_means.iter().any(|m| m.len() != NUM_FEATURES)
        {
            return Err(Error::Config(
                "class_means must be a 4 x 25 matrix".into(),
            ));
        }
        if !(self.dominance_factor > 0.0) {
            return Err(Error::Config("dominance_factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Generate `4 * samples_per_class` rows: class mean plus Gaussian noise per
/// feature. Deterministic per (spec, seed).
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let schema = FeatureSchema::default();

    let mut means = spec.class_means.clone();
    if let Some(electrode) = &spec.dominant_electrode {
        let cols = schema.electrode_features(electrode)?;
        for row in means.iter_mut() {
            for &j in &cols {
                row[j] *= spec.dominance_factor;
            }
        }
    }

    let normal = Normal::new(0.0, spec.noise_stddev)
        .map_err(|e| Error::Config(format!("bad noise_stddev: {e}")))?;
    let mut rng = seeding::rng(seed, &[SALT_SYNTH]);
    let n = NUM_CLASSES * spec.samples_per_class;
    let mut features = Vec::with_capacity(n * NUM_FEATURES);
    let mut labels = Vec::with_capacity(n);
    for c in 0..NUM_CLASSES {
        for _ in 0..spec.samples_per_class {
            for j in 0..NUM_FEATURES {
                features.push(means[c][j] + normal.sample(&mut rng));
            }
            labels.push(RiskLabel::from_code(c)?);
        }
    }
    Dataset::new(features, labels, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tiny_csv(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut header: Vec<String> = (0..NUM_FEATURES)
            .map(|i| FeatureSchema::default().feature_name(i).unwrap())
            .collect();
        header.push("label".into());
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "{}", header.join(",")).unwrap();
        for row in rows {
            writeln!(file, "{row}").unwrap();
        }
        file
    }

    fn feature_row(value: f64, label: &str) -> String {
        let mut fields = vec![value.to_string(); NUM_FEATURES];
        fields.push(label.to_string());
        fields.join(",")
    }

    #[test]
    fn load_small_file() {
        let file = tiny_csv(&[
            &feature_row(1.0, "High-Risk"),
            &feature_row(2.0, "Low-Risk"),
            &feature_row(3.0, "Normal"),
        ]);
        let data = load_dataset(file.path()).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.label(0), RiskLabel::HighRisk);
        assert_eq!(data.row(1)[0], 2.0);
    }

    #[test]
    fn load_rejects_wrong_column_count() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "{}", vec!["f"; NUM_FEATURES].join(",")).unwrap();
        let err = load_dataset(file.path()).unwrap_err().to_string();
        assert!(err.contains("26 columns"), "{err}");
    }

    #[test]
    fn load_reports_nan_with_line_number() {
        let rows: Vec<String> = (0..6)
            .map(|i| {
                if i == 5 {
                    let mut fields = vec!["1.0".to_string(); NUM_FEATURES];
                    fields[4] = "NaN".into();
                    fields.push("Normal".into());
                    fields.join(",")
                } else {
                    feature_row(i as f64, "Normal")
                }
            })
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let file = tiny_csv(&refs);
        let err = load_dataset(file.path()).unwrap_err().to_string();
        // NaN row is the 6th data row, so line 7 counting the header.
        assert!(err.contains("line 7"), "{err}");
    }

    #[test]
    fn load_rejects_unknown_label() {
        let file = tiny_csv(&[&feature_row(1.0, "Severe")]);
        let err = load_dataset(file.path()).unwrap_err().to_string();
        assert!(err.contains("Severe"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let spec = SyntheticSpec::well_separated(5, 1.0, None);
        let data = generate_synthetic(&spec, 7).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_dataset_csv(&data, file.path()).unwrap();
        let loaded = load_dataset(file.path()).unwrap();
        assert_eq!(loaded.labels(), data.labels());
        for (a, b) in loaded.feature_matrix().iter().zip(data.feature_matrix()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_quotas_are_exact() {
        let spec = SyntheticSpec::well_separated(25, 1.0, None);
        let data = generate_synthetic(&spec, 1).unwrap();
        let split = stratified_split(&data, 0.8, 9).unwrap();
        assert_eq!(split.train.class_counts(), [20, 20, 20, 20]);
        assert_eq!(split.test.class_counts(), [5, 5, 5, 5]);
    }

    #[test]
    fn split_is_a_partition_and_deterministic() {
        let spec = SyntheticSpec::well_separated(13, 1.0, None);
        let data = generate_synthetic(&spec, 2).unwrap();
        let a = stratified_split(&data, 0.8, 42).unwrap();
        let b = stratified_split(&data, 0.8, 42).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        assert_eq!(a.test_indices, b.test_indices);

        let mut all: Vec<usize> = a.train_indices.iter().chain(&a.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..data.len()).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_sparse_class() {
        let schema = FeatureSchema::default();
        let features = vec![0.0; 3 * NUM_FEATURES];
        let labels = vec![RiskLabel::HighRisk, RiskLabel::HighRisk, RiskLabel::Normal];
        let data = Dataset::new(features, labels, schema).unwrap();
        assert!(stratified_split(&data, 0.8, 0).is_err());
    }

    #[test]
    fn synthetic_counts_and_determinism() {
        let spec = SyntheticSpec::well_separated(10, 1.0, Some("Pz".into()));
        let a = generate_synthetic(&spec, 5).unwrap();
        let b = generate_synthetic(&spec, 5).unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a.class_counts(), [10, 10, 10, 10]);
        assert_eq!(a.feature_matrix(), b.feature_matrix());
    }

    #[test]
    fn synthetic_degenerate_noise_hits_class_means() {
        let mut spec = SyntheticSpec::well_separated(3, 1e-9, None);
        spec.dominant_electrode = None;
        let data = generate_synthetic(&spec, 11).unwrap();
        for i in 0..data.len() {
            let c = data.label(i).code();
            for j in 0..NUM_FEATURES {
                assert!((data.row(i)[j] - spec.class_means[c][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn round_half_up_cases() {
        assert_eq!(round_half_up(7.5), 8);
        assert_eq!(round_half_up(7.4), 7);
        assert_eq!(round_half_up(0.0), 0);
    }
}
