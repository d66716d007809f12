//! The comparison system: TF-IDF document vectors over a bounded feature
//! set, classified by a from-scratch random forest, with a sweep over
//! feature-set sizes selected by validation F1.

mod forest;
mod tfidf;

pub use forest::{
    bootstrap_indices, rf_predict, rf_train, DecisionTree, FeatureSubset, RandomForest, RfConfig,
    TreeNode,
};
pub use tfidf::TfidfModel;

use alloc::string::String;
use alloc::vec::Vec;

use crate::metrics;
use crate::rng;

/// Sparse feature vector: `(column, weight)` pairs sorted by column.
pub type SparseVec = Vec<(u32, f64)>;

/// The weight stored for `feature`, or 0 when absent.
pub fn feature_value(vector: &SparseVec, feature: u32) -> f64 {
    match vector.binary_search_by_key(&feature, |&(c, _)| c) {
        Ok(i) => vector[i].1,
        Err(_) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("{0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Validation F1 observed for one candidate feature-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub n_feat: usize,
    pub f1: f64,
}

/// The winning configuration of [`sweep_features`] and the full sweep log.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub tfidf: TfidfModel,
    pub forest: RandomForest,
    pub n_feat: usize,
    pub f1: f64,
    pub log: Vec<SweepEntry>,
}

/// Fits a TF-IDF model and forest per candidate feature count and keeps
/// the one with the best validation F1; ties go to the smaller feature
/// count. Each candidate trains from its own stream derived from `seed`.
pub fn sweep_features(
    train_docs: &[Vec<String>],
    train_labels: &[bool],
    val_docs: &[Vec<String>],
    val_labels: &[bool],
    n_feat_list: &[usize],
    rf_config: &RfConfig,
    seed: u64,
) -> Result<SweepOutcome, BaselineError> {
    if n_feat_list.is_empty() {
        return Err(BaselineError::InvalidArgument(String::from(
            "feature sweep needs at least one candidate size",
        )));
    }
    if train_docs.len() != train_labels.len() || val_docs.len() != val_labels.len() {
        return Err(BaselineError::InvalidArgument(String::from(
            "documents and labels differ in length",
        )));
    }
    if val_docs.is_empty() {
        return Err(BaselineError::InvalidArgument(String::from(
            "feature sweep needs a nonempty validation set",
        )));
    }

    let mut best: Option<SweepOutcome> = None;
    let mut log = Vec::with_capacity(n_feat_list.len());
    for &n_feat in n_feat_list {
        let tfidf = TfidfModel::fit(train_docs, n_feat)?;
        let train_vecs: Vec<SparseVec> = train_docs.iter().map(|d| tfidf.transform(d)).collect();
        let forest = rf_train(
            &train_vecs,
            train_labels,
            tfidf.n_features(),
            rf_config,
            rng::derive_seed(seed, &[n_feat as u64]),
        )?;
        let val_vecs: Vec<SparseVec> = val_docs.iter().map(|d| tfidf.transform(d)).collect();
        let predictions: Vec<bool> = rf_predict(&val_vecs, &forest)
            .into_iter()
            .map(|(_, label)| label)
            .collect();
        let f1 = metrics::confusion(&predictions, val_labels)
            .expect("validation set is nonempty and aligned")
            .report()
            .f1;
        log.push(SweepEntry { n_feat, f1 });

        let better = match &best {
            None => true,
            Some(b) => f1 > b.f1 || (f1 == b.f1 && n_feat < b.n_feat),
        };
        if better {
            best = Some(SweepOutcome {
                tfidf,
                forest,
                n_feat,
                f1,
                log: Vec::new(),
            });
        }
    }
    let mut outcome = best.expect("candidate list is nonempty");
    outcome.log = log;
    Ok(outcome)
}
