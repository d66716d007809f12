//! Shared checkpoint loading and prediction for `evaluate` and `explain`.

use notecnn_core::baseline::{self, SparseVec};
use notecnn_core::textprep;

use crate::checkpoint;
use crate::config::{ExperimentConfig, OutputLayout, Task};
use crate::error::{CliError, Result};

fn check_task(found: Task, configured: Task, what: &str) -> Result<()> {
    if found != configured {
        return Err(CliError::usage(format!(
            "{what} was trained for task {} but the configured task is {}",
            found.tag(),
            configured.tag()
        )));
    }
    Ok(())
}

fn check_split(found: &str, current: &str, what: &str) -> Result<()> {
    if found != current {
        return Err(CliError::data(format!(
            "{what} was trained on a different training partition than the current split file"
        )));
    }
    Ok(())
}

/// Loads the classifier checkpoint and predicts a label per document.
pub(super) fn predict_cnn(
    config: &ExperimentConfig,
    layout: &OutputLayout,
    split_hash: &str,
    docs: &[Vec<String>],
) -> Result<Vec<bool>> {
    let ckpt = checkpoint::load_cnn(&layout.cnn_checkpoint())?;
    check_task(ckpt.header.task, config.experiment.task, "classifier checkpoint")?;
    check_split(&ckpt.header.split_hash, split_hash, "classifier checkpoint")?;
    let (model, vocab) = ckpt.instantiate()?;
    let mut encoded = Vec::with_capacity(docs.len());
    for doc in docs {
        encoded.push(textprep::encode(doc, &vocab, ckpt.header.n_max)?.ids);
    }
    Ok(model.predict(&encoded)?.iter().map(|p| p.label).collect())
}

/// Loads the forest checkpoint and its vectorizer and predicts a label
/// per document.
pub(super) fn predict_rf(
    config: &ExperimentConfig,
    layout: &OutputLayout,
    split_hash: &str,
    docs: &[Vec<String>],
) -> Result<Vec<bool>> {
    let (header, forest) = checkpoint::load_rf(&layout.rf_checkpoint())?;
    check_task(header.task, config.experiment.task, "forest checkpoint")?;
    check_split(&header.split_hash, split_hash, "forest checkpoint")?;
    let tfidf_file: checkpoint::TfidfFile = crate::io::read_json(&layout.tfidf())?;
    if checkpoint::feature_list_hash(&tfidf_file.features) != header.feature_list_hash {
        return Err(CliError::in_file(
            &layout.tfidf(),
            "feature list does not match the forest checkpoint",
        ));
    }
    let tfidf = tfidf_file.to_model()?;
    let vectors: Vec<SparseVec> = docs.iter().map(|doc| tfidf.transform(doc)).collect();
    Ok(baseline::rf_predict(&vectors, &forest)
        .iter()
        .map(|&(_, label)| label)
        .collect())
}
