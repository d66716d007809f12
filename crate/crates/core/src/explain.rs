//! Chi-square interpretation of a trained classifier: over the correctly
//! predicted samples, score every term's document-level presence against
//! the true class via a 4-cell contingency table, rank terms, and report
//! per-class raw token frequencies with top-K masking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExplainError {
    #[error("{0}")]
    InvalidArgument(String),
}

/// Observed counts of document-level term presence against the true
/// class. `yes_pos` counts positive-class documents containing the term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContingencyTable {
    pub yes_pos: u64,
    pub yes_neg: u64,
    pub no_pos: u64,
    pub no_neg: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.yes_pos + self.yes_neg + self.no_pos + self.no_neg
    }

    /// Expected counts under independence, in the observed-cell order
    /// (yes_pos, yes_neg, no_pos, no_neg): row total x column total over
    /// grand total.
    pub fn expected(&self) -> [f64; 4] {
        let total = self.total() as f64;
        let yes = (self.yes_pos + self.yes_neg) as f64;
        let no = (self.no_pos + self.no_neg) as f64;
        let pos = (self.yes_pos + self.no_pos) as f64;
        let neg = (self.yes_neg + self.no_neg) as f64;
        [
            yes * pos / total,
            yes * neg / total,
            no * pos / total,
            no * neg / total,
        ]
    }

    /// Sum of (observed - expected)^2 / expected over the four cells;
    /// cells with zero expected count (an empty margin) contribute 0.
    pub fn chi2(&self) -> f64 {
        let observed = [
            self.yes_pos as f64,
            self.yes_neg as f64,
            self.no_pos as f64,
            self.no_neg as f64,
        ];
        let expected = self.expected();
        observed
            .iter()
            .zip(&expected)
            .map(|(&o, &e)| if e == 0.0 { 0.0 } else { (o - e) * (o - e) / e })
            .sum()
    }
}

/// One term's chi-square score and the table behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub term: String,
    pub chi2: f64,
    pub table: ContingencyTable,
}

/// Per-class raw occurrence counts of one term. A count is `None` when
/// the term falls outside that class's top-K frequency ranking and is
/// therefore masked in reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyRow {
    pub term: String,
    pub count_pos: Option<u64>,
    pub count_neg: Option<u64>,
    pub n_pos: u64,
    pub n_neg: u64,
}

/// Keeps the samples whose prediction matched the true label.
pub fn filter_correct(
    samples: &[(Vec<String>, bool)],
    predicted: &[bool],
) -> Result<Vec<(Vec<String>, bool)>, ExplainError> {
    if samples.len() != predicted.len() {
        return Err(ExplainError::InvalidArgument(String::from(
            "samples and predictions differ in length",
        )));
    }
    Ok(samples
        .iter()
        .zip(predicted)
        .filter(|((_, label), &pred)| *label == pred)
        .map(|(sample, _)| sample.clone())
        .collect())
}

fn validate_samples(samples: &[(Vec<String>, bool)]) -> Result<(), ExplainError> {
    let n_pos = samples.iter().filter(|(_, label)| *label).count();
    if n_pos == 0 || n_pos == samples.len() {
        return Err(ExplainError::InvalidArgument(String::from(
            "chi-square scoring needs at least one sample of each class",
        )));
    }
    Ok(())
}

/// Scores one term: presence means the term occurs at least once in the
/// document.
pub fn chi2_score(
    term: &str,
    samples: &[(Vec<String>, bool)],
) -> Result<FeatureScore, ExplainError> {
    validate_samples(samples)?;
    let mut table = ContingencyTable::default();
    for (tokens, label) in samples {
        let present = tokens.iter().any(|t| t == term);
        match (present, label) {
            (true, true) => table.yes_pos += 1,
            (true, false) => table.yes_neg += 1,
            (false, true) => table.no_pos += 1,
            (false, false) => table.no_neg += 1,
        }
    }
    Ok(FeatureScore {
        term: String::from(term),
        chi2: table.chi2(),
        table,
    })
}

/// Scores every distinct term of the sample set and returns the top `k`
/// by descending chi-square, ties broken by term.
pub fn top_k_features(
    samples: &[(Vec<String>, bool)],
    k: usize,
) -> Result<Vec<FeatureScore>, ExplainError> {
    validate_samples(samples)?;
    let n_pos = samples.iter().filter(|(_, label)| *label).count() as u64;
    let n_neg = samples.len() as u64 - n_pos;

    // One pass over documents: per-term presence counts by class.
    let mut presence: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for (tokens, label) in samples {
        let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        for term in distinct {
            let entry = presence.entry(term).or_insert((0, 0));
            if *label {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }

    let mut scored: Vec<FeatureScore> = presence
        .into_iter()
        .map(|(term, (yes_pos, yes_neg))| {
            let table = ContingencyTable {
                yes_pos,
                yes_neg,
                no_pos: n_pos - yes_pos,
                no_neg: n_neg - yes_neg,
            };
            FeatureScore {
                term: String::from(term),
                chi2: table.chi2(),
                table,
            }
        })
        .collect();
    scored.sort_by(|a, b| b.chi2.total_cmp(&a.chi2).then_with(|| a.term.cmp(&b.term)));
    scored.truncate(k);
    Ok(scored)
}

/// Raw per-class occurrence counts for `terms`. With `top_k_mask` set, a
/// class's count is masked unless the term ranks among that class's
/// `top_k_mask` most frequent terms (count descending, term ascending).
pub fn frequency_report(
    terms: &[String],
    samples: &[(Vec<String>, bool)],
    top_k_mask: Option<usize>,
) -> Vec<FrequencyRow> {
    let n_pos = samples.iter().filter(|(_, label)| *label).count() as u64;
    let n_neg = samples.len() as u64 - n_pos;

    let mut counts_pos: BTreeMap<&str, u64> = BTreeMap::new();
    let mut counts_neg: BTreeMap<&str, u64> = BTreeMap::new();
    for (tokens, label) in samples {
        let counts = if *label { &mut counts_pos } else { &mut counts_neg };
        for token in tokens {
            *counts.entry(token).or_insert(0) += 1;
        }
    }

    let top_set = |counts: &BTreeMap<&str, u64>| -> Option<BTreeSet<String>> {
        top_k_mask.map(|k| {
            let mut ranked: Vec<(&str, u64)> = counts.iter().map(|(&t, &c)| (t, c)).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            ranked.truncate(k);
            ranked.into_iter().map(|(t, _)| String::from(t)).collect()
        })
    };
    let top_pos = top_set(&counts_pos);
    let top_neg = top_set(&counts_neg);

    terms
        .iter()
        .map(|term| {
            let visible = |top: &Option<BTreeSet<String>>| match top {
                Some(set) => set.contains(term),
                None => true,
            };
            FrequencyRow {
                term: term.clone(),
                count_pos: visible(&top_pos)
                    .then(|| counts_pos.get(term.as_str()).copied().unwrap_or(0)),
                count_neg: visible(&top_neg)
                    .then(|| counts_neg.get(term.as_str()).copied().unwrap_or(0)),
                n_pos,
                n_neg,
            }
        })
        .collect()
}
