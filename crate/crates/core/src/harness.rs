//! Experiment orchestration: run the (model x scenario x rate) grid, collect
//! the metrics table and importance reports, and write the output artifacts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attacks::{apply_poison, FlipMap, FlipRecord, PoisonConfig, PoisonScenario};
use crate::dataio::{
    generate_synthetic, load_dataset_with, stratified_split, SyntheticSpec, DEFAULT_LABEL_COLUMN,
};
use crate::domain::{Dataset, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::explain::{
    aggregate_importance_by_electrode, format_rate, importance_to_csv, permutation_importance,
    ImportanceContext, ImportanceReport,
};
use crate::learners::{
    fit_adaboost, fit_forest, BoostConfig, Classifier, FeatureSubsample, ForestConfig, TreeConfig,
};
use crate::metrics::{
    accuracy, log_loss, precision_recall_f1, Averaging, ConfusionMatrix, MetricsRow,
    DEFAULT_LOG_LOSS_EPSILON,
};
use crate::seeding::{self, SALT_CELL, SALT_DATA};

pub const DEFAULT_RATES: [f64; 5] = [0.0, 5.0, 25.0, 50.0, 75.0];

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

fn default_seed() -> u64 {
    42
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_rates() -> Vec<f64> {
    DEFAULT_RATES.to_vec()
}
fn default_scenarios() -> Vec<PoisonScenario> {
    vec![PoisonScenario::RandomFlip, PoisonScenario::TargetedFlip]
}
fn default_averaging() -> Averaging {
    Averaging::Macro
}
fn default_label_column() -> String {
    DEFAULT_LABEL_COLUMN.to_string()
}
fn default_samples_per_class() -> usize {
    500
}
fn default_noise_stddev() -> f64 {
    1.0
}
fn default_dominant_electrode() -> Option<String> {
    Some("Pz".to_string())
}
// Default hardness tuned so the clean models clear 90% test accuracy while
// label flipping still produces a strictly decreasing accuracy ladder: the
// class signal is concentrated on the dominant electrode and the remaining
// features are weak distractors.
fn default_class_separation() -> f64 {
    0.2
}
fn default_dominance_factor() -> f64 {
    9.0
}
fn default_rounds() -> usize {
    100
}
fn default_boost_depth() -> usize {
    3
}
fn default_trees() -> usize {
    100
}
fn default_true() -> bool {
    true
}
fn default_repeats() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataConfig {
    Csv {
        path: String,
        #[serde(default = "default_label_column")]
        label_column: String,
    },
    Synthetic {
        #[serde(default = "default_samples_per_class")]
        samples_per_class: usize,
        #[serde(default = "default_noise_stddev")]
        noise_stddev: f64,
        #[serde(default = "default_dominant_electrode")]
        dominant_electrode: Option<String>,
        #[serde(default = "default_class_separation")]
        class_separation: f64,
        #[serde(default = "default_dominance_factor")]
        dominance_factor: f64,
    },
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synthetic {
            samples_per_class: default_samples_per_class(),
            noise_stddev: default_noise_stddev(),
            dominant_electrode: default_dominant_electrode(),
            class_separation: default_class_separation(),
            dominance_factor: default_dominance_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_boost_depth")]
    pub max_depth: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            rounds: default_rounds(),
            max_depth: default_boost_depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    #[serde(default = "default_trees")]
    pub trees: usize,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: default_trees(),
            max_depth: None,
            bootstrap: true,
        }
    }
}

fn default_adaboost() -> Option<AdaBoostParams> {
    Some(AdaBoostParams::default())
}
fn default_forest() -> Option<ForestParams> {
    Some(ForestParams::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelsConfig {
    #[serde(default = "default_adaboost")]
    pub adaboost: Option<AdaBoostParams>,
    #[serde(default = "default_forest")]
    pub random_forest: Option<ForestParams>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        ModelsConfig {
            adaboost: default_adaboost(),
            random_forest: default_forest(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceConfig {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        ImportanceConfig {
            repeats: default_repeats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Poison rates in percent; 0 is always included as the baseline.
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<PoisonScenario>,
    #[serde(default = "default_averaging")]
    pub averaging: Averaging,
    /// Targeted-flip mapping override; defaults to severity inversion.
    #[serde(default)]
    pub targeted_mapping: Option<FlipMap>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub models: ModelsConfig,
    #[serde(default)]
    pub importance: ImportanceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: default_seed(),
            train_fraction: default_train_fraction(),
            rates: default_rates(),
            scenarios: default_scenarios(),
            averaging: default_averaging(),
            targeted_mapping: None,
            data: DataConfig::default(),
            models: ModelsConfig::default(),
            importance: ImportanceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validated()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config render: {e}")))
    }

    /// Normalize and validate: sort rates ascending, force the 0% baseline
    /// in, reject duplicates and out-of-range values.
    pub fn validated(mut self) -> Result<Self> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must be in (0,1), got {}",
                self.train_fraction
            )));
        }
        for &rate in &self.rates {
            if !(0.0..=100.0).contains(&rate) {
                return Err(Error::Config(format!(
                    "poison rate {rate} outside [0,100] percent"
                )));
            }
        }
        let mut sorted = self.rates.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate poison rates".into()));
        }
        if sorted.first() != Some(&0.0) {
            sorted.insert(0, 0.0);
        }
        self.rates = sorted;
        if self.scenarios.is_empty() {
            return Err(Error::Config("at least one attack scenario required".into()));
        }
        let mut seen = Vec::new();
        for s in &self.scenarios {
            if seen.contains(s) {
                return Err(Error::Config("duplicate attack scenarios".into()));
            }
            seen.push(*s);
        }
        if self.models.adaboost.is_none() && self.models.random_forest.is_none() {
            return Err(Error::Config("at least one model required".into()));
        }
        if self.importance.repeats < 1 {
            return Err(Error::Config("importance repeats must be >= 1".into()));
        }
        if let DataConfig::Synthetic {
            samples_per_class,
            noise_stddev,
            class_separation,
            dominance_factor,
            ..
        } = &self.data
        {
            if *samples_per_class < 3 {
                return Err(Error::Config("samples_per_class must be >= 3".into()));
            }
            if !(*noise_stddev > 0.0) {
                return Err(Error::Config("noise_stddev must be > 0".into()));
            }
            if !(*class_separation > 0.0) || !(*dominance_factor > 0.0) {
                return Err(Error::Config(
                    "class_separation and dominance_factor must be > 0".into(),
                ));
            }
        }
        Ok(self)
    }

    /// Model name/kind pairs in report order.
    fn model_entries(&self) -> Vec<ModelEntry> {
        let mut entries = Vec::new();
        if let Some(params) = &self.models.adaboost {
            entries.push(ModelEntry {
                name: "adaboost".to_string(),
                kind: ModelKind::AdaBoost(params.clone()),
            });
        }
        if let Some(params) = &self.models.random_forest {
            entries.push(ModelEntry {
                name: "random_forest".to_string(),
                kind: ModelKind::RandomForest(params.clone()),
            });
        }
        entries
    }

    /// Build the synthetic spec, or None for CSV sources.
    pub fn synthetic_spec(&self) -> Option<SyntheticSpec> {
        match &self.data {
            DataConfig::Csv { .. } => None,
            DataConfig::Synthetic {
                samples_per_class,
                noise_stddev,
                dominant_electrode,
                class_separation,
                dominance_factor,
            } => {
                let class_means = (0..NUM_CLASSES)
                    .map(|c| vec![class_separation * c as f64; NUM_FEATURES])
                    .collect();
                Some(SyntheticSpec {
                    samples_per_class: *samples_per_class,
                    class_means,
                    noise_stddev: *noise_stddev,
                    dominant_electrode: dominant_electrode.clone(),
                    dominance_factor: *dominance_factor,
                })
            }
        }
    }

    pub fn resolve_dataset(&self) -> Result<Dataset> {
        match &self.data {
            DataConfig::Csv { path, label_column } => load_dataset_with(path, label_column),
            DataConfig::Synthetic { .. } => {
                let spec = self.synthetic_spec().expect("synthetic source");
                generate_synthetic(&spec, seeding::derive(self.seed, &[SALT_DATA]))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum ModelKind {
    AdaBoost(AdaBoostParams),
    RandomForest(ForestParams),
}

#[derive(Debug, Clone)]
struct ModelEntry {
    name: String,
    kind: ModelKind,
}

impl ModelKind {
    fn fit(&self, train: &Dataset, seed: u64, par: Parallelism) -> Result<Box<dyn Classifier>> {
        match self {
            ModelKind::AdaBoost(params) => {
                let cfg = BoostConfig {
                    n_rounds: params.rounds,
                    tree: TreeConfig {
                        max_depth: Some(params.max_depth),
                        min_samples_split: 2,
                        feature_subsample: FeatureSubsample::All,
                    },
                };
                Ok(Box::new(fit_adaboost(train, &cfg, seed)?))
            }
            ModelKind::RandomForest(params) => {
                let cfg = ForestConfig {
                    n_trees: params.trees,
                    tree: TreeConfig {
                        max_depth: params.max_depth,
                        min_samples_split: 2,
                        feature_subsample: FeatureSubsample::Sqrt,
                    },
                    bootstrap: params.bootstrap,
                };
                Ok(Box::new(fit_forest(train, &cfg, seed, par)?))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// One (model, scenario, rate) grid cell. The 0% baseline is a single cell
/// per model with scenario "none".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellId {
    pub model: String,
    pub scenario: String,
    pub rate_percent: f64,
}

impl CellId {
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{}_r{}",
            self.model,
            self.scenario,
            format_rate(self.rate_percent)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipDigest {
    pub cell: CellId,
    pub count: usize,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub id: CellId,
    pub metrics: MetricsRow,
    pub importance: ImportanceReport,
    pub flips: Vec<FlipRecord>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

impl SweepReport {
    pub fn rows(&self) -> Vec<&MetricsRow> {
        self.cells.iter().map(|c| &c.metrics).collect()
    }

    pub fn flip_digests(&self) -> Vec<FlipDigest> {
        self.cells
            .iter()
            .map(|cell| {
                let mut hasher = Sha256::new();
                for f in &cell.flips {
                    hasher.update(format!(
                        "{}:{}:{}\n",
                        f.row_index,
                        f.original.code(),
                        f.flipped.code()
                    ));
                }
                FlipDigest {
                    cell: cell.id.clone(),
                    count: cell.flips.len(),
                    sha256: format!("{:x}", hasher.finalize()),
                }
            })
            .collect()
    }
}

struct CellSpec {
    model_index: usize,
    entry: ModelEntry,
    scenario: Option<PoisonScenario>,
    rate_percent: f64,
}

impl CellSpec {
    fn id(&self) -> CellId {
        CellId {
            model: self.entry.name.clone(),
            scenario: self
                .scenario
                .map_or("none".to_string(), |s| s.as_str().to_string()),
            rate_percent: self.rate_percent,
        }
    }

    /// Stable seed tags independent of execution order.
    fn seed_tags(&self) -> [u64; 4] {
        let scenario_code = match self.scenario {
            None => 0,
            Some(PoisonScenario::RandomFlip) => 1,
            Some(PoisonScenario::TargetedFlip) => 2,
        };
        [
            SALT_CELL,
            self.model_index as u64,
            scenario_code,
            (self.rate_percent * 1000.0).round() as u64,
        ]
    }
}

fn build_grid(cfg: &ExperimentConfig) -> Vec<CellSpec> {
    let mut cells = Vec::new();
    for (model_index, entry) in cfg.model_entries().into_iter().enumerate() {
        // One 0% baseline per model, shared across scenarios.
        cells.push(CellSpec {
            model_index,
            entry: entry.clone(),
            scenario: None,
            rate_percent: 0.0,
        });
        for &scenario in &cfg.scenarios {
            for &rate in &cfg.rates {
                if rate == 0.0 {
                    continue;
                }
                cells.push(CellSpec {
                    model_index,
                    entry: entry.clone(),
                    scenario: Some(scenario),
                    rate_percent: rate,
                });
            }
        }
    }
    cells
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &CellSpec,
    train: &Dataset,
    test: &Dataset,
    par: Parallelism,
) -> Result<CellResult> {
    let cell_seed = seeding::derive(cfg.seed, &cell.seed_tags());

    // Each cell re-poisons from the pristine train partition.
    let (poisoned, flips) = match cell.scenario {
        None => (train.clone(), Vec::new()),
        Some(scenario) => {
            let poison = PoisonConfig {
                scenario,
                rate: cell.rate_percent / 100.0,
                mapping: cfg.targeted_mapping,
                seed: seeding::derive(cell_seed, &[0]),
            };
            apply_poison(train, &poison)?
        }
    };

    let model = cell
        .entry
        .kind
        .fit(&poisoned, seeding::derive(cell_seed, &[1]), par)?;

    let predictions: Vec<_> = (0..test.len()).map(|i| model.predict(test.row(i))).collect();
    let probabilities: Vec<[f64; NUM_CLASSES]> =
        (0..test.len()).map(|i| model.predict_proba(test.row(i))).collect();
    let cm = ConfusionMatrix::from_pairs(test.labels(), &predictions)?;
    let acc = accuracy(&cm)?;
    let prf = precision_recall_f1(&cm, cfg.averaging)?;
    let ll = log_loss(test.labels(), &probabilities, DEFAULT_LOG_LOSS_EPSILON)?;

    let id = cell.id();
    let metrics = MetricsRow {
        model: id.model.clone(),
        scenario: id.scenario.clone(),
        rate_percent: cell.rate_percent,
        accuracy: acc * 100.0,
        recall: prf.aggregate.recall * 100.0,
        precision: prf.aggregate.precision * 100.0,
        f1: prf.aggregate.f1 * 100.0,
        log_loss: ll,
        averaging: cfg.averaging,
    };

    let mut importance = permutation_importance(
        model.as_ref(),
        test,
        cfg.importance.repeats,
        seeding::derive(cell_seed, &[2]),
        par,
    )?;
    importance.context = Some(ImportanceContext {
        model: id.model.clone(),
        scenario: id.scenario.clone(),
        rate_percent: cell.rate_percent,
    });

    Ok(CellResult {
        id,
        metrics,
        importance,
        flips,
    })
}

/// Run the full grid. Cells execute independently (possibly concurrently);
/// all randomness is derived per cell from the master seed, so parallel and
/// serial runs produce identical reports.
pub fn run_sweep(cfg: &ExperimentConfig, par: Parallelism) -> Result<SweepReport> {
    let cfg = cfg.clone().validated()?;
    let data = cfg.resolve_dataset()?;
    let split = stratified_split(&data, cfg.train_fraction, cfg.seed)?;
    let grid = build_grid(&cfg);

    let results = map_indexed(par, grid.len(), |i| {
        let cell = &grid[i];
        run_cell(&cfg, cell, &split.train, &split.test, par)
            .map_err(|e| e.annotate(format!("grid cell {}", cell.id().file_stem())))
    });
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { config: cfg, cells })
}

/// Run a single grid cell (the CLI `explain` subcommand).
pub fn run_single_cell(
    cfg: &ExperimentConfig,
    model_name: &str,
    scenario: Option<PoisonScenario>,
    rate_percent: f64,
    par: Parallelism,
) -> Result<CellResult> {
    let cfg = cfg.clone().validated()?;
    let data = cfg.resolve_dataset()?;
    let split = stratified_split(&data, cfg.train_fraction, cfg.seed)?;
    let entries = cfg.model_entries();
    let (model_index, entry) = entries
        .iter()
        .enumerate()
        .find(|(_, e)| e.name == model_name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown model {model_name:?}; configured models: {:?}",
                entries.iter().map(|e| e.name.as_str()).collect::<Vec<_>>()
            ))
        })?;
    if rate_percent > 0.0 && scenario.is_none() {
        return Err(Error::Config(
            "a scenario is required for a nonzero poison rate".into(),
        ));
    }
    let cell = CellSpec {
        model_index,
        entry: entry.clone(),
        scenario: if rate_percent == 0.0 { None } else { scenario },
        rate_percent,
    };
    run_cell(&cfg, &cell, &split.train, &split.test, par)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; use csv or json"
            ))),
        }
    }
}

fn round_to(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}

/// Metrics table with percentages at 2 decimals and log loss at 3.
pub fn render_metrics_table(report: &SweepReport, format: ReportFormat) -> Result<String> {
    if report.cells.is_empty() {
        return Err(Error::Metrics("empty sweep report".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut out =
                String::from("model,scenario,rate,accuracy,recall,precision,f1,log_loss,averaging\n");
            for row in report.rows() {
                out.push_str(&format!(
                    "{},{},{},{:.2},{:.2},{:.2},{:.2},{:.3},{}\n",
                    row.model,
                    row.scenario,
                    format_rate(row.rate_percent),
                    row.accuracy,
                    row.recall,
                    row.precision,
                    row.f1,
                    row.log_loss,
                    row.averaging.as_str()
                ));
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let rows: Vec<serde_json::Value> = report
                .rows()
                .iter()
                .map(|row| {
                    serde_json::json!({
                        "model": row.model,
                        "scenario": row.scenario,
                        "rate": row.rate_percent,
                        "accuracy": round_to(row.accuracy, 2),
                        "recall": round_to(row.recall, 2),
                        "precision": round_to(row.precision, 2),
                        "f1": round_to(row.f1, 2),
                        "log_loss": round_to(row.log_loss, 3),
                        "averaging": row.averaging.as_str(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows)
                .map_err(|e| Error::Metrics(format!("json render: {e}")))
        }
    }
}

/// Per-electrode summary across all cells: the plottable analog of the
/// importance figure.
pub fn render_electrode_summary(report: &SweepReport) -> Result<String> {
    let mut out = String::from("model,scenario,rate,electrode,score\n");
    for cell in &report.cells {
        let schema = crate::domain::FeatureSchema::default();
        let scores = aggregate_importance_by_electrode(&cell.importance, &schema)?;
        for (electrode, score) in scores {
            out.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                cell.id.model,
                cell.id.scenario,
                format_rate(cell.id.rate_percent),
                electrode,
                score
            ));
        }
    }
    Ok(out)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Write the full artifact set under `out_dir`:
/// metrics.{csv|json}, importance/*.{csv,json}, importance summary,
/// flips/*.csv, flip_digests.json, config.echo.
pub fn write_report(report: &SweepReport, out_dir: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let out = out_dir.as_ref();
    let importance_dir = out.join("importance");
    let flips_dir = out.join("flips");
    for dir in [out, &importance_dir, &flips_dir] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }

    let metrics_name = match format {
        ReportFormat::Csv => "metrics.csv",
        ReportFormat::Json => "metrics.json",
    };
    write_file(&out.join(metrics_name), &render_metrics_table(report, format)?)?;

    let schema = crate::domain::FeatureSchema::default();
    for cell in &report.cells {
        let stem = cell.id.file_stem();
        let json = serde_json::to_string_pretty(&cell.importance)
            .map_err(|e| Error::Metrics(format!("json render: {e}")))?;
        write_file(&importance_dir.join(format!("{stem}.json")), &json)?;
        write_file(
            &importance_dir.join(format!("{stem}.csv")),
            &importance_to_csv(&cell.importance, &schema)?,
        )?;

        if !cell.flips.is_empty() {
            let mut csv = String::from("row_index,original,flipped\n");
            for f in &cell.flips {
                csv.push_str(&format!("{},{},{}\n", f.row_index, f.original, f.flipped));
            }
            write_file(&flips_dir.join(format!("{stem}.csv")), &csv)?;
        }
    }
    write_file(
        &importance_dir.join("electrode_summary.csv"),
        &render_electrode_summary(report)?,
    )?;

    let digests = serde_json::to_string_pretty(&report.flip_digests())
        .map_err(|e| Error::Metrics(format!("json render: {e}")))?;
    write_file(&out.join("flip_digests.json"), &digests)?;
    write_file(&out.join("config.echo"), &report.config.to_toml()?)?;
    Ok(())
}
