//! Human- and machine-readable result artifacts: the metrics file and its
//! stdout table, training logs, and the feature and frequency CSV reports.

use std::io::Write;
use std::path::Path;

use notecnn_core::explain::{FeatureScore, FrequencyRow};
use notecnn_core::metrics::{round3, MetricReport};
use serde::{Deserialize, Serialize};

use crate::config::Task;
use crate::error::{CliError, Result};
use crate::io::Provenance;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    pub provenance: Provenance,
    pub task: Task,
    pub model: String,
    /// Which partition was scored, `test` unless overridden.
    pub partition: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub degenerate: bool,
    pub counts: ConfusionCounts,
}

impl MetricsFile {
    pub fn new(
        provenance: Provenance,
        task: Task,
        model: &str,
        partition: &str,
        report: &MetricReport,
    ) -> Self {
        Self {
            provenance,
            task,
            model: model.to_string(),
            partition: partition.to_string(),
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
            accuracy: report.accuracy,
            degenerate: report.degenerate,
            counts: ConfusionCounts {
                true_pos: report.counts.true_pos,
                false_pos: report.counts.false_pos,
                false_neg: report.counts.false_neg,
                true_neg: report.counts.true_neg,
            },
        }
    }
}

/// Renders the evaluation table with one row per model.
pub fn metrics_table(rows: &[(&str, &MetricReport)]) -> String {
    let mut out = String::from("Model  Prec   Rec    F1     Acc\n");
    for (name, report) in rows {
        out.push_str(&format!(
            "{:<6} {:<6.3} {:<6.3} {:<6.3} {:<6.3}\n",
            name,
            round3(report.precision),
            round3(report.recall),
            round3(report.f1),
            round3(report.accuracy),
        ));
    }
    out
}

/// One classifier training-log line; `fold` names the cross-validation
/// fold the epoch belongs to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CnnLogLine {
    pub fold: usize,
    pub epoch: usize,
    pub train_loss: f64,
    pub val_precision: f64,
    pub val_recall: f64,
    pub val_f1: f64,
}

/// One forest feature-sweep log line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfLogLine {
    pub fold: usize,
    pub n_features: usize,
    pub val_f1: f64,
}

fn provenance_comment(provenance: &Provenance) -> String {
    format!(
        "# config_hash={} seed={}",
        provenance.config_hash, provenance.seed
    )
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Chi-square feature ranking, one feature per row, best first.
pub fn write_feature_csv(
    path: &Path,
    provenance: &Provenance,
    scores: &[FeatureScore],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::in_file(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| CliError::in_file(path, e);
    writeln!(w, "{}", provenance_comment(provenance)).map_err(io_err)?;
    writeln!(w, "term,chi2,o_yes_pos,o_yes_neg,o_no_pos,o_no_neg").map_err(io_err)?;
    for score in scores {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            csv_field(&score.term),
            score.chi2,
            score.table.yes_pos,
            score.table.yes_neg,
            score.table.no_pos,
            score.table.no_neg,
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Per-class raw term counts; a count outside that class's most frequent
/// `mask_top_k` terms is rendered as the literal `non-top{K}`.
pub fn write_frequency_csv(
    path: &Path,
    provenance: &Provenance,
    rows: &[FrequencyRow],
    mask_top_k: Option<usize>,
) -> Result<()> {
    let render = |count: Option<u64>| match (count, mask_top_k) {
        (Some(c), _) => c.to_string(),
        (None, Some(k)) => format!("non-top{k}"),
        (None, None) => unreachable!("unmasked report has no hidden cells"),
    };
    let file = std::fs::File::create(path).map_err(|e| CliError::in_file(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| CliError::in_file(path, e);
    writeln!(w, "{}", provenance_comment(provenance)).map_err(io_err)?;
    if let Some(first) = rows.first() {
        writeln!(w, "# samples pos={} neg={}", first.n_pos, first.n_neg).map_err(io_err)?;
    }
    writeln!(w, "term,count_pos,count_neg").map_err(io_err)?;
    for row in rows {
        writeln!(
            w,
            "{},{},{}",
            csv_field(&row.term),
            render(row.count_pos),
            render(row.count_neg),
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
