//! `explain`: ranks vocabulary terms by chi-square over the correctly
//! predicted test samples and reports per-class term frequencies with
//! top-K masking.

use std::collections::BTreeMap;

use notecnn_core::explain as xp;
use notecnn_core::textprep::Tokenizer;

use super::scoring;
use crate::config::{ExperimentConfig, ModelKind, OutputLayout};
use crate::error::{CliError, Result};
use crate::io::{self, CohortSampleWire, SplitFile};
use crate::report::{write_feature_csv, write_frequency_csv};

pub fn run(config: &ExperimentConfig, top_k_override: Option<usize>) -> Result<()> {
    let layout = OutputLayout::new(config.output_dir()?);
    let provenance = super::provenance(config);
    let top_k = top_k_override.unwrap_or(config.explain.top_k);
    let model_name = match config.experiment.model {
        ModelKind::Rf => "rf",
        ModelKind::Cnn | ModelKind::Both => "cnn",
    };

    let (_, wires): (_, Vec<CohortSampleWire>) = io::read_jsonl(&layout.cohort())?;
    let samples: BTreeMap<String, CohortSampleWire> = wires
        .into_iter()
        .map(|w| (w.admission_id.clone(), w))
        .collect();
    let split: SplitFile = io::read_json(&layout.split())?;
    split.validate(&layout.split())?;

    let mut ids: Vec<&String> = split.test.iter().collect();
    if config.explain.include_train {
        ids.extend(split.train.iter());
    }
    let task = config.experiment.task.to_core();
    let tokenizer = Tokenizer::new();
    let mut docs = Vec::with_capacity(ids.len());
    let mut truth = Vec::with_capacity(ids.len());
    for id in ids {
        let Some(sample) = samples.get(id) else {
            return Err(CliError::in_file(
                &layout.split(),
                format!("split id {id} is not in the cohort file"),
            ));
        };
        docs.push(tokenizer.tokenize(&sample.note_text));
        truth.push(task.label_of(&sample.to_core()));
    }

    let split_hash = split.train_fingerprint();
    let predicted = match model_name {
        "rf" => scoring::predict_rf(config, &layout, &split_hash, &docs)?,
        _ => scoring::predict_cnn(config, &layout, &split_hash, &docs)?,
    };

    let labeled: Vec<(Vec<String>, bool)> = docs.into_iter().zip(truth).collect();
    let correct = xp::filter_correct(&labeled, &predicted)?;
    let has_both_classes = correct.iter().any(|(_, label)| *label)
        && correct.iter().any(|(_, label)| !*label);
    if !has_both_classes {
        println!(
            "no correctly predicted samples from both classes; writing empty reports for {model_name}"
        );
        write_feature_csv(&layout.feature_csv(model_name), &provenance, &[])?;
        write_frequency_csv(
            &layout.frequency_csv(model_name),
            &provenance,
            &[],
            config.explain.mask_top_k,
        )?;
        return Ok(());
    }

    let scores = xp::top_k_features(&correct, top_k)?;
    let terms: Vec<String> = scores.iter().map(|s| s.term.clone()).collect();
    let rows = xp::frequency_report(&terms, &correct, config.explain.mask_top_k);
    write_feature_csv(&layout.feature_csv(model_name), &provenance, &scores)?;
    write_frequency_csv(
        &layout.frequency_csv(model_name),
        &provenance,
        &rows,
        config.explain.mask_top_k,
    )?;

    println!(
        "top {} features over {} correctly predicted samples ({model_name}):",
        scores.len(),
        correct.len()
    );
    for score in &scores {
        println!("  {:<20} chi2={:.3}", score.term, score.chi2);
    }
    Ok(())
}
