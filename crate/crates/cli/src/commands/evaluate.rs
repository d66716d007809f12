//! `evaluate`: scores trained checkpoints on the held-out test partition
//! and refuses the training partition unless explicitly overridden.

use std::collections::BTreeMap;

use notecnn_core::metrics::{self, MetricReport};
use notecnn_core::textprep::Tokenizer;

use super::{scoring, Partition};
use crate::config::{ExperimentConfig, OutputLayout};
use crate::error::{CliError, Result};
use crate::io::{self, CohortSampleWire, SplitFile};
use crate::report::{metrics_table, MetricsFile};

pub fn run(config: &ExperimentConfig, partition: Partition, allow_train_eval: bool) -> Result<()> {
    if partition == Partition::Train && !allow_train_eval {
        return Err(CliError::usage(
            "refusing to evaluate on the training partition; pass --allow-train-eval if this is intentional",
        ));
    }
    let layout = OutputLayout::new(config.output_dir()?);
    let provenance = super::provenance(config);

    let (_, wires): (_, Vec<CohortSampleWire>) = io::read_jsonl(&layout.cohort())?;
    let samples: BTreeMap<String, CohortSampleWire> = wires
        .into_iter()
        .map(|w| (w.admission_id.clone(), w))
        .collect();
    let split: SplitFile = io::read_json(&layout.split())?;
    split.validate(&layout.split())?;
    let (ids, partition_name) = match partition {
        Partition::Test => (&split.test, "test"),
        Partition::Train => (&split.train, "train"),
    };
    if ids.is_empty() {
        return Err(CliError::in_file(
            &layout.split(),
            format!("the {partition_name} partition is empty"),
        ));
    }

    let task = config.experiment.task.to_core();
    let tokenizer = Tokenizer::new();
    let mut docs = Vec::with_capacity(ids.len());
    let mut truth = Vec::with_capacity(ids.len());
    for id in ids {
        let Some(sample) = samples.get(id) else {
            return Err(CliError::in_file(
                &layout.split(),
                format!("{partition_name} id {id} is not in the cohort file"),
            ));
        };
        docs.push(tokenizer.tokenize(&sample.note_text));
        truth.push(task.label_of(&sample.to_core()));
    }

    let split_hash = split.train_fingerprint();
    let mut rows: Vec<(&str, MetricReport)> = Vec::new();
    if config.experiment.model.wants_cnn() {
        let predicted = scoring::predict_cnn(config, &layout, &split_hash, &docs)?;
        let report = metrics::confusion(&predicted, &truth)?.report();
        let file = MetricsFile::new(
            provenance.clone(),
            config.experiment.task,
            "cnn",
            partition_name,
            &report,
        );
        io::write_json(&layout.metrics("cnn"), &file)?;
        rows.push(("cnn", report));
    }
    if config.experiment.model.wants_rf() {
        let predicted = scoring::predict_rf(config, &layout, &split_hash, &docs)?;
        let report = metrics::confusion(&predicted, &truth)?.report();
        let file = MetricsFile::new(
            provenance.clone(),
            config.experiment.task,
            "rf",
            partition_name,
            &report,
        );
        io::write_json(&layout.metrics("rf"), &file)?;
        rows.push(("rf", report));
    }

    let table_rows: Vec<(&str, &MetricReport)> =
        rows.iter().map(|(name, report)| (*name, report)).collect();
    print!("{}", metrics_table(&table_rows));
    if rows.iter().any(|(_, r)| r.degenerate) {
        eprintln!("warning: a metric had a 0/0 ratio and was reported as 0");
    }
    Ok(())
}
