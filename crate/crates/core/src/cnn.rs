//! Convolutional text classifier trained from scratch: embedding lookup,
//! parallel convolution banks (one per filter width), ReLU, max-over-time
//! pooling, dropout on the penultimate vector and a two-class softmax.
//!
//! All parameters live in one flat `f64` vector in a fixed layout
//! (embedding rows, then each width bank's weights and biases, then the
//! dense layer), so gradients, optimizer state and checkpoints all share
//! the same indexing. Gradients are exact; the training loop is adaptive
//! moment estimation with early stopping on validation F1 and is fully
//! deterministic for a fixed seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::RngExt;
use rand_pcg::Pcg64;

use crate::math;
use crate::metrics;
use crate::rng;
use crate::textprep::{EmbeddingTable, PAD_ID};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

const INIT_TAG: u64 = 0;
const SHUFFLE_TAG: u64 = 1;
const DROPOUT_TAG: u64 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CnnError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("non-finite value in {location}")]
    NonFinite { location: String },
    #[error("training diverged (loss not finite) at epoch {epoch}")]
    Diverged { epoch: usize },
}

/// Architecture of the classifier; the trainable values live in
/// [`CnnModel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnnConfig {
    /// Fixed encoded document length.
    pub n_max: usize,
    /// Convolution window sizes, e.g. `[1, 2, 3]`.
    pub filter_widths: Vec<usize>,
    /// Filters per width; the penultimate vector has
    /// `filter_widths.len() * filters_per_width` units.
    pub filters_per_width: usize,
}

/// Training hyperparameters. `seed` drives initialization, shuffling and
/// dropout, so two runs with equal config and data match bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Consecutive epochs without a validation-F1 improvement before
    /// stopping; 0 disables early stopping.
    pub early_stop_patience: usize,
    /// Dropout rate on the penultimate vector, in [0, 1).
    pub dropout_rate: f64,
    /// When false, embedding rows receive zero gradient and stay
    /// bit-identical through training.
    pub fine_tune_embeddings: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 50,
            learning_rate: 1e-3,
            seed: 0,
            early_stop_patience: 5,
            dropout_rate: 0.5,
            fine_tune_embeddings: true,
        }
    }
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Post-activation feature maps, one per filter, banks in width order.
    pub maps: Vec<Vec<f64>>,
    /// Pre-activation values of the same maps.
    pub preacts: Vec<Vec<f64>>,
    /// Per filter: pooled maximum and its (lowest) index in the map.
    pub pooled: Vec<(f64, usize)>,
    /// Penultimate vector as the dense layer saw it (after any dropout).
    pub z: Vec<f64>,
    /// Per-unit dropout factor: 1 in eval mode, else 0 or 1/(1-rate).
    pub dropout_scale: Vec<f64>,
    /// Class scores, negative class first.
    pub logits: [f64; 2],
    /// Softmax of the logits.
    pub probabilities: [f64; 2],
    x: Vec<f64>,
}

/// One scored document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub prob_positive: f64,
    /// True for predicted readmission; a probability of exactly 0.5 stays
    /// negative.
    pub label: bool,
}

/// One epoch of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_precision: f64,
    pub val_recall: f64,
    pub val_f1: f64,
}

/// A trained model plus how training went.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// The model from the epoch with the best validation F1.
    pub model: CnnModel,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// The classifier parameters and their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    n_max: usize,
    k: usize,
    n_ids: usize,
    widths: Vec<usize>,
    f: usize,
    dropout_rate: f64,
    params: Vec<f64>,
    bank_offsets: Vec<(usize, usize)>,
    dense_w_off: usize,
    dense_b_off: usize,
}

fn validate_arch(config: &CnnConfig) -> Result<(), CnnError> {
    if config.filter_widths.is_empty() {
        return Err(CnnError::InvalidArgument(String::from(
            "at least one filter width is required",
        )));
    }
    if config.filter_widths.iter().any(|&h| h == 0) {
        return Err(CnnError::InvalidArgument(String::from(
            "filter widths must be positive",
        )));
    }
    if config.filters_per_width == 0 {
        return Err(CnnError::InvalidArgument(String::from(
            "filters per width must be positive",
        )));
    }
    let widest = *config.filter_widths.iter().max().unwrap();
    if config.n_max < widest {
        return Err(CnnError::Dimension(format!(
            "document length {} is shorter than the widest filter {}",
            config.n_max, widest
        )));
    }
    Ok(())
}

impl CnnModel {
    /// Builds a model with the given initial embedding rows. Filter and
    /// dense weights are drawn uniformly with per-layer fan-based bounds
    /// from the seeded stream; biases start at zero.
    pub fn new(
        embedding: EmbeddingTable,
        config: &CnnConfig,
        dropout_rate: f64,
        seed: u64,
    ) -> Result<CnnModel, CnnError> {
        let mut model = Self::with_params(
            config,
            embedding.n_rows(),
            embedding.dim(),
            dropout_rate,
            None,
        )?;
        let emb = embedding.into_raw();
        model.params[..emb.len()].copy_from_slice(&emb);

        let mut rng = rng::stream(seed);
        let k = model.k;
        for (bank, &h) in model.bank_offsets.clone().iter().zip(&model.widths) {
            let bound = math::sqrt(6.0 / (h * k + 1) as f64);
            for slot in &mut model.params[bank.0..bank.1] {
                *slot = rng.random_range(-bound..bound);
            }
        }
        let bound = math::sqrt(6.0 / (model.m() + 2) as f64);
        for slot in &mut model.params[model.dense_w_off..model.dense_b_off] {
            *slot = rng.random_range(-bound..bound);
        }
        Ok(model)
    }

    /// Rebuilds a model from stored parameters (the layout of
    /// [`CnnModel::params`]).
    pub fn from_params(
        config: &CnnConfig,
        n_ids: usize,
        embed_dim: usize,
        dropout_rate: f64,
        params: Vec<f64>,
    ) -> Result<CnnModel, CnnError> {
        Self::with_params(config, n_ids, embed_dim, dropout_rate, Some(params))
    }

    fn with_params(
        config: &CnnConfig,
        n_ids: usize,
        embed_dim: usize,
        dropout_rate: f64,
        params: Option<Vec<f64>>,
    ) -> Result<CnnModel, CnnError> {
        validate_arch(config)?;
        if embed_dim == 0 || n_ids < 2 {
            return Err(CnnError::InvalidArgument(String::from(
                "embedding table must have positive dimension and reserved rows",
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(CnnError::InvalidArgument(String::from(
                "dropout rate must lie in [0, 1)",
            )));
        }

        let f = config.filters_per_width;
        let mut offset = n_ids * embed_dim;
        let mut bank_offsets = Vec::with_capacity(config.filter_widths.len());
        for &h in &config.filter_widths {
            let w_off = offset;
            offset += f * h * embed_dim;
            bank_offsets.push((w_off, offset));
            offset += f;
        }
        let m = f * config.filter_widths.len();
        let dense_w_off = offset;
        let dense_b_off = offset + 2 * m;
        let total = dense_b_off + 2;

        let params = match params {
            Some(p) => {
                if p.len() != total {
                    return Err(CnnError::Dimension(format!(
                        "expected {} parameters, got {}",
                        total,
                        p.len()
                    )));
                }
                if let Some(i) = p.iter().position(|v| !v.is_finite()) {
                    return Err(CnnError::NonFinite {
                        location: format!("stored parameter {i}"),
                    });
                }
                p
            }
            None => alloc::vec![0.0; total],
        };

        Ok(CnnModel {
            n_max: config.n_max,
            k: embed_dim,
            n_ids,
            widths: config.filter_widths.clone(),
            f,
            dropout_rate,
            params,
            bank_offsets,
            dense_w_off,
            dense_b_off,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn embed_dim(&self) -> usize {
        self.k
    }

    pub fn n_ids(&self) -> usize {
        self.n_ids
    }

    pub fn filter_widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn filters_per_width(&self) -> usize {
        self.f
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    /// Total filter count; the penultimate vector length.
    pub fn m(&self) -> usize {
        self.f * self.widths.len()
    }

    /// All parameters: embedding rows, each bank's weights then biases,
    /// dense weights, dense biases.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable access for optimizer steps and numeric checks.
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn embedding_range(&self) -> Range<usize> {
        0..self.n_ids * self.k
    }

    /// Per width bank: (weight range, bias range).
    pub fn bank_ranges(&self) -> Vec<(Range<usize>, Range<usize>)> {
        self.bank_offsets
            .iter()
            .map(|&(w_off, b_off)| (w_off..b_off, b_off..b_off + self.f))
            .collect()
    }

    pub fn dense_w_range(&self) -> Range<usize> {
        self.dense_w_off..self.dense_b_off
    }

    pub fn dense_b_range(&self) -> Range<usize> {
        self.dense_b_off..self.dense_b_off + 2
    }

    fn embed(&self, ids: &[u32]) -> Result<Vec<f64>, CnnError> {
        if ids.len() != self.n_max {
            return Err(CnnError::Dimension(format!(
                "encoded document has {} ids, model expects {}",
                ids.len(),
                self.n_max
            )));
        }
        let k = self.k;
        let mut x = alloc::vec![0.0; self.n_max * k];
        for (i, &id) in ids.iter().enumerate() {
            if id == PAD_ID {
                continue;
            }
            let row = id as usize;
            if row >= self.n_ids {
                return Err(CnnError::Dimension(format!(
                    "token id {id} outside embedding table of {} rows",
                    self.n_ids
                )));
            }
            x[i * k..(i + 1) * k].copy_from_slice(&self.params[row * k..(row + 1) * k]);
        }
        Ok(x)
    }

    /// Forward pass without dropout; prediction mode.
    pub fn forward_eval(&self, ids: &[u32]) -> Result<ForwardTrace, CnnError> {
        self.forward_inner(ids, None)
    }

    /// Forward pass with a dropout mask drawn from `dropout_rng`;
    /// training mode.
    pub fn forward_train(
        &self,
        ids: &[u32],
        dropout_rng: &mut Pcg64,
    ) -> Result<ForwardTrace, CnnError> {
        self.forward_inner(ids, Some(dropout_rng))
    }

    fn forward_inner(
        &self,
        ids: &[u32],
        dropout_rng: Option<&mut Pcg64>,
    ) -> Result<ForwardTrace, CnnError> {
        let x = self.embed(ids)?;
        let (n, k, f, m) = (self.n_max, self.k, self.f, self.m());

        let mut maps = Vec::with_capacity(m);
        let mut preacts = Vec::with_capacity(m);
        let mut pooled = Vec::with_capacity(m);
        for (bank_idx, &h) in self.widths.iter().enumerate() {
            let (w_off, b_off) = self.bank_offsets[bank_idx];
            for filter_idx in 0..f {
                let w = &self.params[w_off + filter_idx * h * k..w_off + (filter_idx + 1) * h * k];
                let bias = self.params[b_off + filter_idx];
                let preact = conv_preact(&x, n, k, w, h, bias)?;
                for &v in &preact {
                    if !v.is_finite() {
                        return Err(CnnError::NonFinite {
                            location: format!("feature map (width {h}, filter {filter_idx})"),
                        });
                    }
                }
                let map: Vec<f64> = preact.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
                pooled.push(max_pool(&map)?);
                maps.push(map);
                preacts.push(preact);
            }
        }

        let keep = 1.0 - self.dropout_rate;
        let dropout_scale: Vec<f64> = match dropout_rng {
            Some(rng) if self.dropout_rate > 0.0 => (0..m)
                .map(|_| if rng.random_bool(keep) { 1.0 / keep } else { 0.0 })
                .collect(),
            _ => alloc::vec![1.0; m],
        };
        let z: Vec<f64> = pooled
            .iter()
            .zip(&dropout_scale)
            .map(|(&(v, _), &s)| v * s)
            .collect();
        if z.iter().any(|v| !v.is_finite()) {
            return Err(CnnError::NonFinite {
                location: String::from("penultimate vector"),
            });
        }

        let dense_w = &self.params[self.dense_w_off..self.dense_b_off];
        let dense_b = &self.params[self.dense_b_off..self.dense_b_off + 2];
        let mut logits = [0.0; 2];
        for c in 0..2 {
            let mut acc = dense_b[c];
            for j in 0..m {
                acc += dense_w[c * m + j] * z[j];
            }
            logits[c] = acc;
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(CnnError::NonFinite {
                location: String::from("logits"),
            });
        }

        let peak = logits[0].max(logits[1]);
        let exp = [math::exp(logits[0] - peak), math::exp(logits[1] - peak)];
        let sum = exp[0] + exp[1];
        let probabilities = [exp[0] / sum, exp[1] / sum];

        Ok(ForwardTrace {
            maps,
            preacts,
            pooled,
            z,
            dropout_scale,
            logits,
            probabilities,
            x,
        })
    }

    /// Mean negative log-likelihood of the batch and its exact gradient
    /// with respect to every parameter (same layout as
    /// [`CnnModel::params`]). Dropout masks are drawn per example from
    /// `dropout_seed`, so a fixed seed makes this a deterministic function
    /// of the parameters, as finite-difference checks require. With
    /// `tune_embeddings` false the embedding block of the gradient stays
    /// zero; padding rows receive zero gradient always.
    pub fn loss_and_gradients(
        &self,
        batch: &[(&[u32], bool)],
        tune_embeddings: bool,
        dropout_seed: u64,
    ) -> Result<(f64, Vec<f64>), CnnError> {
        if batch.is_empty() {
            return Err(CnnError::InvalidArgument(String::from(
                "gradient batch must be nonempty",
            )));
        }
        let (n, k, f, m) = (self.n_max, self.k, self.f, self.m());
        let scale = 1.0 / batch.len() as f64;
        let mut grads = alloc::vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let mut rng = rng::stream(dropout_seed);

        for &(ids, label) in batch {
            let trace = self.forward_train(ids, &mut rng)?;
            let target = usize::from(label);

            let peak = trace.logits[0].max(trace.logits[1]);
            let logsumexp = peak
                + math::ln(math::exp(trace.logits[0] - peak) + math::exp(trace.logits[1] - peak));
            loss += (logsumexp - trace.logits[target]) * scale;

            let mut g_logits = [0.0; 2];
            for c in 0..2 {
                let indicator = if c == target { 1.0 } else { 0.0 };
                g_logits[c] = (trace.probabilities[c] - indicator) * scale;
            }

            let dense_w = &self.params[self.dense_w_off..self.dense_b_off];
            let mut g_z = alloc::vec![0.0; m];
            for c in 0..2 {
                grads[self.dense_b_off + c] += g_logits[c];
                for j in 0..m {
                    grads[self.dense_w_off + c * m + j] += g_logits[c] * trace.z[j];
                    g_z[j] += dense_w[c * m + j] * g_logits[c];
                }
            }

            let mut g_x = alloc::vec![0.0; n * k];
            for (bank_idx, &h) in self.widths.iter().enumerate() {
                let (w_off, b_off) = self.bank_offsets[bank_idx];
                for filter_idx in 0..f {
                    let unit = bank_idx * f + filter_idx;
                    // Max pooling routes the unit's gradient to exactly
                    // one map position; ReLU gates it on the sign of the
                    // pre-activation there.
                    let pos = trace.pooled[unit].1;
                    if trace.preacts[unit][pos] <= 0.0 {
                        continue;
                    }
                    let g_c = g_z[unit] * trace.dropout_scale[unit];
                    if g_c == 0.0 {
                        continue;
                    }
                    grads[b_off + filter_idx] += g_c;
                    let w_base = w_off + filter_idx * h * k;
                    for t in 0..h {
                        for d in 0..k {
                            grads[w_base + t * k + d] += g_c * trace.x[(pos + t) * k + d];
                            if tune_embeddings {
                                g_x[(pos + t) * k + d] += g_c * self.params[w_base + t * k + d];
                            }
                        }
                    }
                }
            }

            if tune_embeddings {
                for (i, &id) in ids.iter().enumerate() {
                    if id == PAD_ID {
                        continue;
                    }
                    let row = id as usize * k;
                    for d in 0..k {
                        grads[row + d] += g_x[i * k + d];
                    }
                }
            }
        }
        Ok((loss, grads))
    }

    /// Scores one encoded document in eval mode.
    pub fn predict_one(&self, ids: &[u32]) -> Result<Prediction, CnnError> {
        let trace = self.forward_eval(ids)?;
        let prob_positive = trace.probabilities[1];
        Ok(Prediction {
            prob_positive,
            label: prob_positive > 0.5,
        })
    }

    /// Scores a list of encoded documents in eval mode.
    pub fn predict(&self, notes: &[Vec<u32>]) -> Result<Vec<Prediction>, CnnError> {
        notes.iter().map(|ids| self.predict_one(ids)).collect()
    }
}

/// Raw convolution responses: `out[j] = <filter, x[j..j+h)> + bias` for
/// `j = 0..n-h`, before any activation.
fn conv_preact(
    x: &[f64],
    n: usize,
    k: usize,
    filter: &[f64],
    h: usize,
    bias: f64,
) -> Result<Vec<f64>, CnnError> {
    if x.len() != n * k || filter.len() != h * k {
        return Err(CnnError::Dimension(String::from(
            "convolution input or filter has inconsistent shape",
        )));
    }
    if h == 0 || n < h {
        return Err(CnnError::Dimension(format!(
            "window of {h} words does not fit a document of {n}"
        )));
    }
    let mut out = Vec::with_capacity(n - h + 1);
    for j in 0..=(n - h) {
        let mut acc = bias;
        let window = &x[j * k..(j + h) * k];
        for (a, b) in window.iter().zip(filter) {
            acc += a * b;
        }
        out.push(acc);
    }
    Ok(out)
}

/// One filter applied across a document: the rectified feature map of
/// length `n - h + 1`.
pub fn conv_forward(
    x: &[f64],
    n: usize,
    k: usize,
    filter: &[f64],
    h: usize,
    bias: f64,
) -> Result<Vec<f64>, CnnError> {
    let preact = conv_preact(x, n, k, filter, h, bias)?;
    Ok(preact.into_iter().map(|v| if v > 0.0 { v } else { 0.0 }).collect())
}

/// Maximum of a feature map and the index it occurred at; ties take the
/// lowest index so the backward pass is deterministic.
pub fn max_pool(map: &[f64]) -> Result<(f64, usize), CnnError> {
    if map.is_empty() {
        return Err(CnnError::Dimension(String::from(
            "cannot pool an empty feature map",
        )));
    }
    let mut best = map[0];
    let mut idx = 0;
    for (j, &v) in map.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            idx = j;
        }
    }
    Ok((best, idx))
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    fn new(len: usize) -> Self {
        AdamState {
            m: alloc::vec![0.0; len],
            v: alloc::vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let m_corr = 1.0 - math::powf(BETA1, self.t as f64);
        let v_corr = 1.0 - math::powf(BETA2, self.t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[i] / m_corr;
            let v_hat = self.v[i] / v_corr;
            params[i] -= lr * m_hat / (math::sqrt(v_hat) + ADAM_EPS);
        }
    }
}

fn validate_train_inputs(
    arch: &CnnConfig,
    train_set: &[(Vec<u32>, bool)],
    val_set: &[(Vec<u32>, bool)],
    config: &TrainConfig,
) -> Result<(), CnnError> {
    if config.epochs == 0 {
        return Err(CnnError::InvalidArgument(String::from(
            "training needs at least one epoch",
        )));
    }
    if config.batch_size == 0 {
        return Err(CnnError::InvalidArgument(String::from(
            "batch size must be positive",
        )));
    }
    if !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
        return Err(CnnError::InvalidArgument(String::from(
            "learning rate must be positive and finite",
        )));
    }
    if train_set.is_empty() || val_set.is_empty() {
        return Err(CnnError::InvalidArgument(String::from(
            "training and validation sets must be nonempty",
        )));
    }
    for (ids, _) in train_set.iter().chain(val_set) {
        if ids.len() != arch.n_max {
            return Err(CnnError::Dimension(format!(
                "encoded document has {} ids, model expects {}",
                ids.len(),
                arch.n_max
            )));
        }
    }
    Ok(())
}

/// Trains a fresh model. Per epoch: shuffle, mini-batch updates, then
/// validation F1; the parameters from the best-F1 epoch are returned.
/// Stops early after `early_stop_patience` epochs without improvement.
/// Everything random (initialization, shuffling, dropout) derives from
/// `config.seed`.
pub fn train(
    embedding: EmbeddingTable,
    arch: &CnnConfig,
    train_set: &[(Vec<u32>, bool)],
    val_set: &[(Vec<u32>, bool)],
    config: &TrainConfig,
) -> Result<TrainOutcome, CnnError> {
    validate_train_inputs(arch, train_set, val_set, config)?;
    let mut model = CnnModel::new(
        embedding,
        arch,
        config.dropout_rate,
        rng::derive_seed(config.seed, &[INIT_TAG]),
    )?;

    let mut adam = AdamState::new(model.params.len());
    let mut log = Vec::new();
    let mut best_params = model.params.clone();
    let mut best_f1 = -1.0;
    let mut best_epoch = 0;
    let mut epochs_since_improvement = 0;
    let mut stopped_early = false;

    let val_labels: Vec<bool> = val_set.iter().map(|&(_, label)| label).collect();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=config.epochs {
        let mut shuffle_rng = rng::substream2(config.seed, SHUFFLE_TAG, epoch as u64);
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<(&[u32], bool)> = chunk
                .iter()
                .map(|&i| (train_set[i].0.as_slice(), train_set[i].1))
                .collect();
            let dropout_seed = rng::derive_seed(
                config.seed,
                &[DROPOUT_TAG, epoch as u64, batch_idx as u64],
            );
            let (loss, grads) = model
                .loss_and_gradients(&batch, config.fine_tune_embeddings, dropout_seed)
                .map_err(|e| match e {
                    CnnError::NonFinite { .. } => CnnError::Diverged { epoch },
                    other => other,
                })?;
            if !loss.is_finite() {
                return Err(CnnError::Diverged { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            adam.step(&mut model.params, &grads, config.learning_rate);
        }
        let train_loss = loss_sum / train_set.len() as f64;

        let mut predictions = Vec::with_capacity(val_set.len());
        for (ids, _) in val_set {
            let p = model.predict_one(ids).map_err(|e| match e {
                CnnError::NonFinite { .. } => CnnError::Diverged { epoch },
                other => other,
            })?;
            predictions.push(p.label);
        }
        let report = metrics::confusion(&predictions, &val_labels)
            .expect("validation set is nonempty and aligned")
            .report();
        log.push(EpochLog {
            epoch,
            train_loss,
            val_precision: report.precision,
            val_recall: report.recall,
            val_f1: report.f1,
        });

        if report.f1 > best_f1 {
            best_f1 = report.f1;
            best_params.copy_from_slice(&model.params);
            best_epoch = epoch;
            epochs_since_improvement = 0;
        } else {
            epochs_since_improvement += 1;
            if config.early_stop_patience > 0
                && epochs_since_improvement >= config.early_stop_patience
            {
                stopped_early = true;
                break;
            }
        }
    }

    model.params = best_params;
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
        stopped_early,
    })
}
