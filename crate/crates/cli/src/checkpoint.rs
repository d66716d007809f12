//! Model checkpoints.
//!
//! Classifier: magic "NCNM", version, a length-prefixed JSON header with
//! the architecture, vocabulary, provenance, and split fingerprint, then
//! the flat parameter vector as little-endian doubles in the model's
//! declared order (embedding rows, filter banks, dense layer).
//!
//! Forest: magic "NCRF", version, a JSON header with the hyperparameters
//! and a hash of the feature list, then per-tree node arrays. Its TF-IDF
//! vectorizer is a sibling JSON file with the feature terms, document
//! frequencies, and corpus size.

use std::path::Path;

use notecnn_core::baseline::{
    DecisionTree, RandomForest, RfConfig, TfidfModel, TreeNode,
};
use notecnn_core::cnn::{CnnConfig, CnnModel};
use notecnn_core::textprep::{Vocabulary, RESERVED_IDS};
use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::config::{FeatureSplitConfig, Task};
use crate::error::{CliError, Result};
use crate::io::Provenance;

const CNN_MAGIC: &[u8; 4] = b"NCNM";
const RF_MAGIC: &[u8; 4] = b"NCRF";
const VERSION: u16 = 1;

const LEAF_TAG: u8 = 0;
const INTERNAL_TAG: u8 = 1;

use crate::io::sha256_hex;

/// Fingerprint of a term list, order-sensitive.
pub fn feature_list_hash(terms: &[String]) -> String {
    let mut data = Vec::new();
    for term in terms {
        data.extend_from_slice(term.as_bytes());
        data.push(b'\n');
    }
    sha256_hex(&data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnTrainEcho {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub early_stop_patience: usize,
    pub fine_tune_embeddings: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CnnHeader {
    pub provenance: Provenance,
    pub task: Task,
    pub split_hash: String,
    pub n_max: usize,
    pub embed_dim: usize,
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    pub dropout_rate: f64,
    pub vocab: Vec<String>,
    pub n_params: u64,
    pub train: CnnTrainEcho,
}

#[derive(Debug, Clone)]
pub struct CnnCheckpoint {
    pub header: CnnHeader,
    pub params: Vec<f64>,
}

impl CnnCheckpoint {
    /// Rebuilds the model and its vocabulary.
    pub fn instantiate(&self) -> Result<(CnnModel, Vocabulary)> {
        let config = CnnConfig {
            n_max: self.header.n_max,
            filter_widths: self.header.filter_widths.clone(),
            filters_per_width: self.header.filters_per_width,
        };
        let n_ids = self.header.vocab.len() + RESERVED_IDS as usize;
        let model = CnnModel::from_params(
            &config,
            n_ids,
            self.header.embed_dim,
            self.header.dropout_rate,
            self.params.clone(),
        )?;
        let vocab = Vocabulary::from_tokens(self.header.vocab.clone())?;
        Ok((model, vocab))
    }
}

pub fn save_cnn(path: &Path, header: &CnnHeader, params: &[f64]) -> Result<()> {
    assert_eq!(header.n_params as usize, params.len());
    let mut w = Writer::new(CNN_MAGIC, VERSION);
    let head = serde_json::to_vec(header).expect("serializable");
    w.u64(head.len() as u64);
    w.raw(&head);
    for &p in params {
        w.f64(p);
    }
    w.write_to(path)
}

pub fn load_cnn(path: &Path) -> Result<CnnCheckpoint> {
    let buf = std::fs::read(path).map_err(|e| CliError::in_file(path, e))?;
    let mut r = Reader::new(&buf, path);
    r.expect_magic(CNN_MAGIC, "classifier checkpoint")?;
    r.expect_version(VERSION)?;
    let head_len = r.len_field("header")?;
    let header: CnnHeader = serde_json::from_slice(r.bytes(head_len)?)
        .map_err(|e| CliError::in_file(path, format!("bad checkpoint header: {e}")))?;
    let n_params = usize::try_from(header.n_params)
        .map_err(|_| CliError::in_file(path, "parameter count overflows"))?;
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        params.push(r.f64()?);
    }
    r.finish()?;
    Ok(CnnCheckpoint { header, params })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfHeader {
    pub provenance: Provenance,
    pub task: Task,
    pub split_hash: String,
    pub n_features: usize,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeatureSplitConfig,
    pub bootstrap: bool,
    pub feature_list_hash: String,
    pub forest_seed: u64,
    pub tree_node_counts: Vec<u32>,
}

impl RfHeader {
    pub fn rf_config(&self) -> Result<RfConfig> {
        Ok(RfConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            features_per_split: self.features_per_split.to_core()?,
            bootstrap: self.bootstrap,
        })
    }
}

pub fn save_rf(path: &Path, header: &RfHeader, forest: &RandomForest) -> Result<()> {
    assert_eq!(header.tree_node_counts.len(), forest.trees().len());
    let mut w = Writer::new(RF_MAGIC, VERSION);
    let head = serde_json::to_vec(header).expect("serializable");
    w.u64(head.len() as u64);
    w.raw(&head);
    for tree in forest.trees() {
        for node in tree.nodes() {
            match node {
                TreeNode::Leaf { neg, pos } => {
                    w.u8(LEAF_TAG);
                    w.u32(*neg);
                    w.u32(*pos);
                }
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.u8(INTERNAL_TAG);
                    w.u32(*feature);
                    w.f64(*threshold);
                    w.u32(*left);
                    w.u32(*right);
                }
            }
        }
    }
    w.write_to(path)
}

pub fn load_rf(path: &Path) -> Result<(RfHeader, RandomForest)> {
    let buf = std::fs::read(path).map_err(|e| CliError::in_file(path, e))?;
    let mut r = Reader::new(&buf, path);
    r.expect_magic(RF_MAGIC, "forest checkpoint")?;
    r.expect_version(VERSION)?;
    let head_len = r.len_field("header")?;
    let header: RfHeader = serde_json::from_slice(r.bytes(head_len)?)
        .map_err(|e| CliError::in_file(path, format!("bad checkpoint header: {e}")))?;
    let mut trees = Vec::with_capacity(header.tree_node_counts.len());
    for &count in &header.tree_node_counts {
        let mut nodes = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let node = match r.u8()? {
                LEAF_TAG => TreeNode::Leaf {
                    neg: r.u32()?,
                    pos: r.u32()?,
                },
                INTERNAL_TAG => TreeNode::Internal {
                    feature: r.u32()?,
                    threshold: r.f64()?,
                    left: r.u32()?,
                    right: r.u32()?,
                },
                other => {
                    return Err(CliError::in_file(
                        r.path(),
                        format!("unknown tree node tag {other}"),
                    ))
                }
            };
            nodes.push(node);
        }
        trees.push(DecisionTree::from_nodes(nodes)?);
    }
    r.finish()?;
    let forest = RandomForest::from_parts(
        trees,
        header.n_features,
        header.rf_config()?,
        header.forest_seed,
    )?;
    Ok((header, forest))
}

/// TF-IDF vectorizer state: the selected terms, their document
/// frequencies, and the fitted corpus size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfFile {
    pub provenance: Provenance,
    pub features: Vec<String>,
    pub df: Vec<u64>,
    pub n_docs: u64,
}

impl TfidfFile {
    pub fn from_model(model: &TfidfModel, provenance: Provenance) -> Self {
        Self {
            provenance,
            features: model.terms().to_vec(),
            df: model.df().to_vec(),
            n_docs: model.n_docs(),
        }
    }

    pub fn to_model(&self) -> Result<TfidfModel> {
        Ok(TfidfModel::from_parts(
            self.features.clone(),
            self.df.clone(),
            self.n_docs,
        )?)
    }
}
