//! Note text preparation: tokenization, vocabulary construction, id
//! encoding and word-embedding initialization.
//!
//! Tokens are lowercased alphanumeric runs with English stop words and
//! purely numeric tokens removed. Vocabulary ids start at 2; id 0 is the
//! padding token and id 1 the unknown token.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::RngExt;

use crate::rng;

/// Id of the padding token; its embedding row is pinned to zero.
pub const PAD_ID: u32 = 0;

/// Id assigned to tokens outside the vocabulary.
pub const UNK_ID: u32 = 1;

/// Ids below this are reserved (padding and unknown).
pub const RESERVED_IDS: u32 = 2;

static STOP_WORDS_RAW: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextError {
    #[error("duplicate token {0:?} in vocabulary listing")]
    DuplicateToken(String),
    #[error("embedding for {token:?} has {found} dimensions, expected {expected}")]
    DimMismatch {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Splits note text into model tokens. Owns the stop list, so build one
/// and reuse it across documents.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stop_words: BTreeSet<&'static str>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Tokenizer {
            stop_words: STOP_WORDS_RAW
                .lines()
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// Lowercases, splits on runs of non-alphanumeric characters, then
    /// drops stop words and tokens made only of digits.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                for lower in ch.to_lowercase() {
                    current.push(lower);
                }
            } else if !current.is_empty() {
                self.push_token(&mut tokens, core::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            self.push_token(&mut tokens, current);
        }
        tokens
    }

    fn push_token(&self, tokens: &mut Vec<String>, token: String) {
        if token.chars().all(|c| c.is_numeric()) {
            return;
        }
        if self.stop_words.contains(token.as_str()) {
            return;
        }
        tokens.push(token);
    }
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::new()
    }
}

/// Token-to-id mapping. Ids are dense, starting at [`RESERVED_IDS`], in
/// descending training-corpus frequency with lexicographic tie-breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: BTreeMap<String, u32>,
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from tokenized training documents: tokens
    /// ranked by descending corpus frequency (ties lexicographic), kept up
    /// to `max_size` when given.
    pub fn build(docs: &[Vec<String>], max_size: Option<usize>) -> Vocabulary {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in docs {
            for token in doc {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(cap) = max_size {
            ranked.truncate(cap);
        }
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string()))
            .expect("ranked tokens are distinct")
    }

    /// Rebuilds a vocabulary from an already-ordered token list, assigning
    /// ids in listing order. Used when loading a stored model.
    pub fn from_tokens<I>(tokens: I) -> Result<Vocabulary, TextError>
    where
        I: IntoIterator<Item = String>,
    {
        let tokens: Vec<String> = tokens.into_iter().collect();
        let mut token_to_id = BTreeMap::new();
        for (i, token) in tokens.iter().enumerate() {
            let id = RESERVED_IDS + i as u32;
            if token_to_id.insert(token.clone(), id).is_some() {
                return Err(TextError::DuplicateToken(token.clone()));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            tokens,
        })
    }

    /// The id for a token, or [`UNK_ID`] when absent.
    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    /// The token for an id; `None` for the reserved ids and out-of-range.
    pub fn token(&self, id: u32) -> Option<&str> {
        id.checked_sub(RESERVED_IDS)
            .and_then(|i| self.tokens.get(i as usize))
            .map(String::as_str)
    }

    /// Number of real tokens, excluding the two reserved ids.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Total id count including padding and unknown; the embedding row count.
    pub fn n_ids(&self) -> usize {
        self.tokens.len() + RESERVED_IDS as usize
    }

    /// Tokens in id order, for serialization.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// A fixed-length id encoding of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDoc {
    /// Exactly `n_max` ids; positions past `true_len` are [`PAD_ID`].
    pub ids: Vec<u32>,
    /// Token count before padding, capped at `n_max`.
    pub true_len: usize,
}

/// Maps tokens to ids, truncating at `n_max` tokens (keeping the head) and
/// padding shorter documents to exactly `n_max`.
pub fn encode(
    tokens: &[String],
    vocab: &Vocabulary,
    n_max: usize,
) -> Result<EncodedDoc, TextError> {
    if n_max == 0 {
        return Err(TextError::InvalidArgument(String::from(
            "document length cap must be positive",
        )));
    }
    let true_len = tokens.len().min(n_max);
    let mut ids = Vec::with_capacity(n_max);
    ids.extend(tokens.iter().take(n_max).map(|t| vocab.id(t)));
    ids.resize(n_max, PAD_ID);
    Ok(EncodedDoc { ids, true_len })
}

/// Initial word-embedding rows, indexed by vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds the initial table for a vocabulary: the padding row is zero,
    /// pretrained vectors are copied where available, and every other row
    /// (including the unknown token) is drawn uniformly from
    /// (-0.25, 0.25). Random rows come from one seeded stream consumed in
    /// id order, so the result is a pure function of its inputs.
    pub fn init(
        vocab: &Vocabulary,
        dim: usize,
        pretrained: &BTreeMap<String, Vec<f64>>,
        seed: u64,
    ) -> Result<EmbeddingTable, TextError> {
        if dim == 0 {
            return Err(TextError::InvalidArgument(String::from(
                "embedding dimension must be positive",
            )));
        }
        let n_rows = vocab.n_ids();
        let mut rows = alloc::vec![0.0; n_rows * dim];
        let mut rng = rng::stream(seed);
        for id in UNK_ID..n_rows as u32 {
            let pretrained_row = vocab.token(id).and_then(|t| pretrained.get(t));
            let dst = &mut rows[id as usize * dim..(id as usize + 1) * dim];
            match pretrained_row {
                Some(vector) => {
                    if vector.len() != dim {
                        return Err(TextError::DimMismatch {
                            token: vocab.token(id).unwrap_or("").to_string(),
                            expected: dim,
                            found: vector.len(),
                        });
                    }
                    dst.copy_from_slice(vector);
                }
                None => {
                    for slot in dst {
                        *slot = rng.random_range(-0.25..0.25);
                    }
                }
            }
        }
        Ok(EmbeddingTable { dim, rows })
    }

    /// A fully random table (no pretrained vectors).
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Result<EmbeddingTable, TextError> {
        Self::init(vocab, dim, &BTreeMap::new(), seed)
    }

    /// Rebuilds a table from stored values; `values.len()` must be a
    /// multiple of `dim`.
    pub fn from_raw(dim: usize, values: Vec<f64>) -> Result<EmbeddingTable, TextError> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(TextError::InvalidArgument(String::from(
                "embedding values do not form whole rows",
            )));
        }
        Ok(EmbeddingTable { dim, rows: values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.rows[start..start + self.dim]
    }

    /// Consumes the table, yielding the flat row-major values.
    pub fn into_raw(self) -> Vec<f64> {
        self.rows
    }
}
