//! Term frequency-inverse document frequency vectors over a bounded
//! feature set.
//!
//! Features are the top-N terms by document frequency (ties broken
//! lexicographically). A term's weight is its raw count in the document
//! times `ln((1 + N_docs) / (1 + df)) + 1`, and each document vector is
//! L2-normalized.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{BaselineError, SparseVec};
use crate::math;

/// A fitted vectorizer: the selected terms, their document frequencies,
/// and the training corpus size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TfidfModel {
    columns: BTreeMap<String, u32>,
    terms: Vec<String>,
    df: Vec<u64>,
    n_docs: u64,
}

impl TfidfModel {
    /// Selects the `n_feat` highest-document-frequency terms of the
    /// training corpus. A corpus with fewer distinct terms keeps them all.
    pub fn fit(docs: &[Vec<String>], n_feat: usize) -> Result<TfidfModel, BaselineError> {
        if docs.is_empty() {
            return Err(BaselineError::InvalidArgument(String::from(
                "cannot fit a vectorizer on an empty corpus",
            )));
        }
        if n_feat == 0 {
            return Err(BaselineError::InvalidArgument(String::from(
                "feature count must be positive",
            )));
        }
        let mut df_by_term: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in docs {
            let distinct: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for term in distinct {
                *df_by_term.entry(term).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = df_by_term.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(n_feat);

        let mut columns = BTreeMap::new();
        let mut terms = Vec::with_capacity(ranked.len());
        let mut df = Vec::with_capacity(ranked.len());
        for (rank, (term, count)) in ranked.into_iter().enumerate() {
            columns.insert(String::from(term), rank as u32);
            terms.push(String::from(term));
            df.push(count);
        }
        Ok(TfidfModel {
            columns,
            terms,
            df,
            n_docs: docs.len() as u64,
        })
    }

    /// Rebuilds a fitted model from stored fields.
    pub fn from_parts(
        terms: Vec<String>,
        df: Vec<u64>,
        n_docs: u64,
    ) -> Result<TfidfModel, BaselineError> {
        if terms.len() != df.len() {
            return Err(BaselineError::Dimension(String::from(
                "feature list and document frequencies differ in length",
            )));
        }
        if n_docs == 0 {
            return Err(BaselineError::InvalidArgument(String::from(
                "corpus size must be positive",
            )));
        }
        if df.iter().any(|&d| d == 0 || d > n_docs) {
            return Err(BaselineError::InvalidArgument(String::from(
                "document frequencies must lie in [1, corpus size]",
            )));
        }
        let mut columns = BTreeMap::new();
        for (rank, term) in terms.iter().enumerate() {
            if columns.insert(term.clone(), rank as u32).is_some() {
                return Err(BaselineError::InvalidArgument(String::from(
                    "duplicate term in feature list",
                )));
            }
        }
        Ok(TfidfModel {
            columns,
            terms,
            df,
            n_docs,
        })
    }

    /// Weighs a document against the fitted features; terms outside the
    /// feature set are ignored. Nonzero vectors have unit L2 norm.
    pub fn transform(&self, doc: &[String]) -> SparseVec {
        let mut tf: BTreeMap<&str, u64> = BTreeMap::new();
        for term in doc {
            *tf.entry(term).or_insert(0) += 1;
        }
        let mut vector: SparseVec = tf
            .into_iter()
            .filter_map(|(term, count)| {
                self.columns.get(term).map(|&col| {
                    let idf =
                        math::ln((1 + self.n_docs) as f64 / (1 + self.df[col as usize]) as f64)
                            + 1.0;
                    (col, count as f64 * idf)
                })
            })
            .collect();
        vector.sort_unstable_by_key(|&(col, _)| col);

        let norm = math::sqrt(vector.iter().map(|&(_, w)| w * w).sum());
        if norm > 0.0 {
            for (_, w) in &mut vector {
                *w /= norm;
            }
        }
        vector
    }

    pub fn n_features(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    /// Terms in column order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Document frequencies in column order.
    pub fn df(&self) -> &[u64] {
        &self.df
    }
}
