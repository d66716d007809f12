//! Experiment configuration: one TOML file describes a full run, command
//! line flags override individual values, and a hash of the effective
//! settings (paths excluded, so artifacts stay location-independent) is
//! embedded in every output for provenance.

use std::path::{Path, PathBuf};

use notecnn_core::baseline::FeatureSubset;
use notecnn_core::cohort::LabelTask;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Task {
    #[serde(rename = "general")]
    #[value(name = "general")]
    General,
    #[serde(rename = "30day")]
    #[value(name = "30day")]
    ThirtyDay,
}

impl Task {
    pub fn to_core(self) -> LabelTask {
        match self {
            Task::General => LabelTask::General,
            Task::ThirtyDay => LabelTask::ThirtyDay,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Task::General => "general",
            Task::ThirtyDay => "30day",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cnn,
    Rf,
    Both,
}

impl ModelKind {
    pub fn wants_cnn(self) -> bool {
        matches!(self, ModelKind::Cnn | ModelKind::Both)
    }

    pub fn wants_rf(self) -> bool {
        matches!(self, ModelKind::Rf | ModelKind::Both)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub admissions: Option<PathBuf>,
    pub notes: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    pub task: Task,
    pub model: ModelKind,
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            task: Task::General,
            model: ModelKind::Both,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortParams {
    pub holdout_ratio: f64,
    pub cv_folds: usize,
}

impl Default for CohortParams {
    fn default() -> Self {
        Self {
            holdout_ratio: 0.10,
            cv_folds: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextParams {
    pub n_max: usize,
    pub embed_dim: usize,
    pub vocab_max_size: Option<usize>,
}

impl Default for TextParams {
    fn default() -> Self {
        Self {
            n_max: 2000,
            embed_dim: 200,
            vocab_max_size: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnnParams {
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub early_stop_patience: usize,
    pub fine_tune_embeddings: bool,
}

impl Default for CnnParams {
    fn default() -> Self {
        Self {
            filter_widths: vec![1, 2, 3],
            filters_per_width: 100,
            epochs: 20,
            batch_size: 50,
            learning_rate: 1e-3,
            dropout: 0.5,
            early_stop_patience: 5,
            fine_tune_embeddings: true,
        }
    }
}

/// Candidate count per split: a number, `"sqrt"`, or `"all"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureSplitConfig {
    Count(usize),
    Named(String),
}

impl FeatureSplitConfig {
    pub fn to_core(&self) -> Result<FeatureSubset> {
        match self {
            FeatureSplitConfig::Count(k) => Ok(FeatureSubset::Fixed(*k)),
            FeatureSplitConfig::Named(name) => match name.as_str() {
                "sqrt" => Ok(FeatureSubset::Sqrt),
                "all" => Ok(FeatureSubset::All),
                other => Err(CliError::usage(format!(
                    "rf.features_per_split must be a count, \"sqrt\", or \"all\", got \"{other}\""
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeatureSplitConfig,
    pub bootstrap: bool,
    pub feature_sweep: Vec<usize>,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeatureSplitConfig::Named("sqrt".to_string()),
            bootstrap: true,
            feature_sweep: vec![10_000, 15_000, 20_000, 25_000],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplainParams {
    pub top_k: usize,
    pub mask_top_k: Option<usize>,
    pub include_train: bool,
}

impl Default for ExplainParams {
    fn default() -> Self {
        Self {
            top_k: 20,
            mask_top_k: Some(2000),
            include_train: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub patients: usize,
    pub admissions_min: u32,
    pub admissions_max: u32,
    pub readmit_30day_rate: f64,
    pub note_length_min: usize,
    pub note_length_max: usize,
    pub signal_tokens_pos: Vec<String>,
    pub signal_tokens_neg: Vec<String>,
    pub signal_probability: f64,
    pub background_vocab: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            patients: 1000,
            admissions_min: 1,
            admissions_max: 3,
            readmit_30day_rate: 0.3,
            note_length_min: 40,
            note_length_max: 120,
            signal_tokens_pos: Vec::new(),
            signal_tokens_neg: Vec::new(),
            signal_probability: 0.0,
            background_vocab: 500,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub paths: Paths,
    pub experiment: Experiment,
    pub cohort: CohortParams,
    pub text: TextParams,
    pub cnn: CnnParams,
    pub rf: RfParams,
    pub explain: ExplainParams,
    pub synth: SynthParams,
}

/// The hashed view excludes paths: two runs with the same settings agree
/// on the hash no matter where their files live.
#[derive(Serialize)]
struct HashedView<'a> {
    experiment: &'a Experiment,
    cohort: &'a CohortParams,
    text: &'a TextParams,
    cnn: &'a CnnParams,
    rf: &'a RfParams,
    explain: &'a ExplainParams,
    synth: &'a SynthParams,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
        toml::from_str(&raw).map_err(|e| CliError::in_file(path, e))
    }

    pub fn config_hash(&self) -> String {
        let view = HashedView {
            experiment: &self.experiment,
            cohort: &self.cohort,
            text: &self.text,
            cnn: &self.cnn,
            rf: &self.rf,
            explain: &self.explain,
            synth: &self.synth,
        };
        let canonical = toml::to_string(&view).expect("config serializes");
        crate::io::sha256_hex(canonical.as_bytes())
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.paths
            .output_dir
            .as_deref()
            .ok_or_else(|| CliError::usage("paths.output_dir is not set"))
    }

    pub fn admissions_path(&self) -> Result<&Path> {
        self.paths
            .admissions
            .as_deref()
            .ok_or_else(|| CliError::usage("paths.admissions is not set"))
    }
}

/// Canonical artifact names inside the output directory.
pub struct OutputLayout {
    dir: PathBuf,
}

impl OutputLayout {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn admissions(&self) -> PathBuf {
        self.file("admissions.jsonl")
    }

    pub fn notes(&self) -> PathBuf {
        self.file("notes.jsonl")
    }

    pub fn ground_truth(&self) -> PathBuf {
        self.file("ground_truth.jsonl")
    }

    pub fn cohort(&self) -> PathBuf {
        self.file("cohort.jsonl")
    }

    pub fn split(&self) -> PathBuf {
        self.file("split.json")
    }

    pub fn cohort_stats(&self) -> PathBuf {
        self.file("cohort_stats.json")
    }

    pub fn encoded_cache(&self) -> PathBuf {
        self.file("train_cache.ncnn")
    }

    pub fn cnn_checkpoint(&self) -> PathBuf {
        self.file("model_cnn.ncnm")
    }

    pub fn rf_checkpoint(&self) -> PathBuf {
        self.file("model_rf.ncrf")
    }

    pub fn tfidf(&self) -> PathBuf {
        self.file("tfidf_rf.json")
    }

    pub fn train_log(&self, model: &str) -> PathBuf {
        self.file(&format!("train_log_{model}.jsonl"))
    }

    pub fn metrics(&self, model: &str) -> PathBuf {
        self.file(&format!("metrics_{model}.json"))
    }

    pub fn feature_csv(&self, model: &str) -> PathBuf {
        self.file(&format!("features_{model}.csv"))
    }

    pub fn frequency_csv(&self, model: &str) -> PathBuf {
        self.file(&format!("frequency_{model}.csv"))
    }
}
