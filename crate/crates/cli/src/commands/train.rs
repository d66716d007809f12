//! `train`: cross-validated model selection on the training partition.
//!
//! Each cross-validation fold serves once as the validation set; the
//! model from the best-scoring fold becomes the checkpoint. The test
//! partition is never read here; checkpoints record a fingerprint of the
//! training ids and folds as proof.

use std::collections::{BTreeMap, BTreeSet};

use notecnn_core::baseline::{self, RfConfig};
use notecnn_core::cnn::{self, CnnConfig, CnnModel, TrainConfig};
use notecnn_core::rng;
use notecnn_core::textprep::{self, EmbeddingTable, Tokenizer, Vocabulary};

use crate::cache::{self, EncodedCache};
use crate::checkpoint::{self, CnnHeader, CnnTrainEcho, RfHeader};
use crate::config::{ExperimentConfig, OutputLayout};
use crate::error::{CliError, Result};
use crate::io::{self, CohortSampleWire, Provenance, SplitFile};
use crate::report::{CnnLogLine, RfLogLine};

const EMBED_SEED_TAG: u64 = 10;
const CNN_FOLD_TAG: u64 = 11;
const RF_FOLD_TAG: u64 = 12;

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let layout = OutputLayout::new(config.output_dir()?);
    let provenance = super::provenance(config);

    let (_, wires): (_, Vec<CohortSampleWire>) = io::read_jsonl(&layout.cohort())?;
    let samples: BTreeMap<String, CohortSampleWire> = wires
        .into_iter()
        .map(|w| (w.admission_id.clone(), w))
        .collect();
    let split: SplitFile = io::read_json(&layout.split())?;
    split.validate(&layout.split())?;

    let task = config.experiment.task.to_core();
    let tokenizer = Tokenizer::new();
    let mut tokens = Vec::with_capacity(split.train.len());
    let mut labels = Vec::with_capacity(split.train.len());
    let mut index_of = BTreeMap::new();
    for id in &split.train {
        let Some(sample) = samples.get(id) else {
            return Err(CliError::in_file(
                &layout.split(),
                format!("train id {id} is not in the cohort file"),
            ));
        };
        index_of.insert(id.as_str(), tokens.len());
        tokens.push(tokenizer.tokenize(&sample.note_text));
        labels.push(task.label_of(&sample.to_core()));
    }

    let mut folds = Vec::with_capacity(split.cv_folds.len());
    let mut covered = BTreeSet::new();
    for fold in &split.cv_folds {
        let mut indices = Vec::with_capacity(fold.len());
        for id in fold {
            let Some(&i) = index_of.get(id.as_str()) else {
                return Err(CliError::in_file(
                    &layout.split(),
                    format!("fold id {id} is not a train id"),
                ));
            };
            indices.push(i);
            covered.insert(i);
        }
        folds.push(indices);
    }
    if folds.len() < 2 || covered.len() != tokens.len() {
        return Err(CliError::in_file(
            &layout.split(),
            "cv folds must partition the training ids into at least two folds",
        ));
    }

    let split_hash = split.train_fingerprint();
    if config.experiment.model.wants_cnn() {
        train_cnn(config, &layout, &provenance, &split_hash, &tokens, &labels, &folds)?;
    }
    if config.experiment.model.wants_rf() {
        train_rf(config, &layout, &provenance, &split_hash, &tokens, &labels, &folds)?;
    }
    Ok(())
}

fn assemble<T: Clone>(items: &[T], fold: &[usize]) -> (Vec<T>, Vec<T>) {
    let in_fold: BTreeSet<usize> = fold.iter().copied().collect();
    let mut rest = Vec::with_capacity(items.len() - fold.len());
    for (i, item) in items.iter().enumerate() {
        if !in_fold.contains(&i) {
            rest.push(item.clone());
        }
    }
    let held = fold.iter().map(|&i| items[i].clone()).collect();
    (rest, held)
}

fn train_cnn(
    config: &ExperimentConfig,
    layout: &OutputLayout,
    provenance: &Provenance,
    split_hash: &str,
    tokens: &[Vec<String>],
    labels: &[bool],
    folds: &[Vec<usize>],
) -> Result<()> {
    let text = &config.text;
    let params = &config.cnn;
    let seed = config.experiment.seed;
    let vocab = Vocabulary::build(tokens, text.vocab_max_size);

    let cache_path = layout.encoded_cache();
    let cached = cache::load_if_current(&cache_path, provenance)?
        .filter(|c| c.n_max == text.n_max && c.labels == labels);
    let encoded = match cached {
        Some(c) => c.docs,
        None => {
            let mut docs = Vec::with_capacity(tokens.len());
            for doc in tokens {
                docs.push(textprep::encode(doc, &vocab, text.n_max)?.ids);
            }
            cache::write_cache(
                &cache_path,
                &EncodedCache {
                    provenance: provenance.clone(),
                    n_max: text.n_max,
                    docs: docs.clone(),
                    labels: labels.to_vec(),
                },
            )?;
            docs
        }
    };

    let pretrained = match &config.paths.embeddings {
        Some(path) => io::load_embedding_file(path, text.embed_dim)?,
        None => BTreeMap::new(),
    };
    let embedding = EmbeddingTable::init(
        &vocab,
        text.embed_dim,
        &pretrained,
        rng::derive_seed(seed, &[EMBED_SEED_TAG]),
    )?;

    let arch = CnnConfig {
        n_max: text.n_max,
        filter_widths: params.filter_widths.clone(),
        filters_per_width: params.filters_per_width,
    };
    let labeled: Vec<(Vec<u32>, bool)> = encoded
        .iter()
        .cloned()
        .zip(labels.iter().copied())
        .collect();

    let mut best: Option<(f64, usize, CnnModel)> = None;
    let mut log_lines = Vec::new();
    for (fold_index, fold) in folds.iter().enumerate() {
        let (train_set, val_set) = assemble(&labeled, fold);
        let train_config = TrainConfig {
            epochs: params.epochs,
            batch_size: params.batch_size,
            learning_rate: params.learning_rate,
            seed: rng::derive_seed(seed, &[CNN_FOLD_TAG, fold_index as u64]),
            early_stop_patience: params.early_stop_patience,
            dropout_rate: params.dropout,
            fine_tune_embeddings: params.fine_tune_embeddings,
        };
        let outcome = cnn::train(embedding.clone(), &arch, &train_set, &val_set, &train_config)?;
        for entry in &outcome.log {
            log_lines.push(CnnLogLine {
                fold: fold_index,
                epoch: entry.epoch,
                train_loss: entry.train_loss,
                val_precision: entry.val_precision,
                val_recall: entry.val_recall,
                val_f1: entry.val_f1,
            });
        }
        let fold_f1 = outcome
            .log
            .iter()
            .find(|e| e.epoch == outcome.best_epoch)
            .map_or(0.0, |e| e.val_f1);
        if best.as_ref().is_none_or(|(f1, _, _)| fold_f1 > *f1) {
            best = Some((fold_f1, fold_index, outcome.model));
        }
    }
    let (best_f1, best_fold, model) = best.expect("at least two folds trained");

    io::write_jsonl(&layout.train_log("cnn"), provenance, &log_lines)?;
    let header = CnnHeader {
        provenance: provenance.clone(),
        task: config.experiment.task,
        split_hash: split_hash.to_string(),
        n_max: text.n_max,
        embed_dim: text.embed_dim,
        filter_widths: params.filter_widths.clone(),
        filters_per_width: params.filters_per_width,
        dropout_rate: params.dropout,
        vocab: vocab.tokens().to_vec(),
        n_params: model.params().len() as u64,
        train: CnnTrainEcho {
            epochs: params.epochs,
            batch_size: params.batch_size,
            learning_rate: params.learning_rate,
            early_stop_patience: params.early_stop_patience,
            fine_tune_embeddings: params.fine_tune_embeddings,
        },
    };
    checkpoint::save_cnn(&layout.cnn_checkpoint(), &header, model.params())?;
    println!("cnn: kept fold {best_fold} (validation F1 {best_f1:.3})");
    Ok(())
}

fn train_rf(
    config: &ExperimentConfig,
    layout: &OutputLayout,
    provenance: &Provenance,
    split_hash: &str,
    tokens: &[Vec<String>],
    labels: &[bool],
    folds: &[Vec<usize>],
) -> Result<()> {
    let params = &config.rf;
    let seed = config.experiment.seed;
    let rf_config = RfConfig {
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: params.features_per_split.to_core()?,
        bootstrap: params.bootstrap,
    };

    let mut best: Option<(f64, usize, usize, baseline::SweepOutcome)> = None;
    let mut log_lines = Vec::new();
    for (fold_index, fold) in folds.iter().enumerate() {
        let (train_docs, val_docs) = assemble(tokens, fold);
        let (train_labels, val_labels) = assemble(labels, fold);
        let outcome = baseline::sweep_features(
            &train_docs,
            &train_labels,
            &val_docs,
            &val_labels,
            &params.feature_sweep,
            &rf_config,
            rng::derive_seed(seed, &[RF_FOLD_TAG, fold_index as u64]),
        )?;
        for entry in &outcome.log {
            log_lines.push(RfLogLine {
                fold: fold_index,
                n_features: entry.n_feat,
                val_f1: entry.f1,
            });
        }
        let improved = best.as_ref().is_none_or(|(f1, n_feat, _, _)| {
            outcome.f1 > *f1 || (outcome.f1 == *f1 && outcome.n_feat < *n_feat)
        });
        if improved {
            best = Some((outcome.f1, outcome.n_feat, fold_index, outcome));
        }
    }
    let (best_f1, best_n_feat, best_fold, outcome) = best.expect("at least two folds trained");

    io::write_jsonl(&layout.train_log("rf"), provenance, &log_lines)?;
    io::write_json(
        &layout.tfidf(),
        &checkpoint::TfidfFile::from_model(&outcome.tfidf, provenance.clone()),
    )?;
    let header = RfHeader {
        provenance: provenance.clone(),
        task: config.experiment.task,
        split_hash: split_hash.to_string(),
        n_features: outcome.forest.n_features(),
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: params.features_per_split.clone(),
        bootstrap: params.bootstrap,
        feature_list_hash: checkpoint::feature_list_hash(outcome.tfidf.terms()),
        forest_seed: outcome.forest.seed(),
        tree_node_counts: outcome
            .forest
            .trees()
            .iter()
            .map(|t| t.nodes().len() as u32)
            .collect(),
    };
    checkpoint::save_rf(&layout.rf_checkpoint(), &header, &outcome.forest)?;
    println!("rf: kept fold {best_fold} with {best_n_feat} features (validation F1 {best_f1:.3})");
    Ok(())
}
