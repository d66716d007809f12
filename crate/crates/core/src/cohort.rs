//! Heart-failure cohort construction: qualifying-code screening, note
//! selection, readmission labeling, class balancing and seeded holdout /
//! cross-validation splits.
//!
//! Admissions are labeled on the full patient timeline: an admission is a
//! general readmission case when any later admission of the same patient
//! starts strictly after its discharge, and a 30-day case when the next
//! admission starts within 30 days of discharge (boundary inclusive,
//! measured discharge-to-admit). Times are UTC seconds.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::rng;

/// 30 days in seconds; the inclusive readmission window.
pub const THIRTY_DAYS_SECS: i64 = 30 * 86_400;

/// The qualifying ICD-9 codes for congestive heart failure.
pub const HEART_FAILURE_ICD9: [&str; 25] = [
    "398.91", "402.01", "402.11", "402.91", "404.01", "404.03", "404.11", "404.13", "404.91",
    "404.93", "428.0", "428.1", "428.20", "428.21", "428.22", "428.23", "428.30", "428.31",
    "428.32", "428.33", "428.40", "428.41", "428.42", "428.43", "428.9",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoteCategory {
    DischargeSummary,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteRecord {
    pub note_id: String,
    pub category: NoteCategory,
    pub text: String,
}

/// One hospital admission with its attached notes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissionRecord {
    pub patient_id: String,
    pub admission_id: String,
    /// UTC seconds.
    pub admit_time: i64,
    /// UTC seconds; never before `admit_time`.
    pub discharge_time: i64,
    /// Code strings with an explicit decimal point, e.g. `"428.0"`.
    pub icd9_codes: Vec<String>,
    pub notes: Vec<NoteRecord>,
}

/// A labeled discharge note ready for modeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortSample {
    pub admission_id: String,
    pub patient_id: String,
    pub note_text: String,
    pub label_general: bool,
    pub label_30day: bool,
}

/// Which readmission outcome a run predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTask {
    General,
    ThirtyDay,
}

impl LabelTask {
    pub fn label_of(&self, sample: &CohortSample) -> bool {
        match self {
            LabelTask::General => sample.label_general,
            LabelTask::ThirtyDay => sample.label_30day,
        }
    }
}

/// Sample-id partitions of one balanced dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// Disjoint id lists whose union is `train`.
    pub cv_folds: Vec<Vec<String>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohortError {
    #[error("admission {second} of patient {patient_id} starts before {first} is discharged")]
    OverlappingAdmissions {
        patient_id: String,
        first: String,
        second: String,
    },
    #[error("admission {admission_id} is discharged before it is admitted")]
    NegativeStay { admission_id: String },
    #[error("admissions not sorted ascending by admit time (at {admission_id})")]
    UnsortedTimeline { admission_id: String },
    #[error("timeline mixes patients {expected} and {found}")]
    MixedPatients { expected: String, found: String },
    #[error("{0}")]
    InvalidArgument(String),
}

/// True when any diagnosis code matches the qualifying heart-failure set.
/// Malformed codes simply fail to match.
pub fn is_heart_failure(admission: &AdmissionRecord) -> bool {
    admission
        .icd9_codes
        .iter()
        .any(|code| HEART_FAILURE_ICD9.contains(&code.as_str()))
}

/// Picks the discharge summary to model: the one with the longest text,
/// ties broken by smallest note id. `None` when the admission has no
/// discharge summary at all (such admissions are excluded from the cohort).
pub fn select_note(admission: &AdmissionRecord) -> Option<&NoteRecord> {
    admission
        .notes
        .iter()
        .filter(|n| n.category == NoteCategory::DischargeSummary)
        .min_by(|a, b| {
            b.text
                .len()
                .cmp(&a.text.len())
                .then_with(|| a.note_id.cmp(&b.note_id))
        })
}

/// Checks that `admissions` is one patient's timeline, sorted by admit
/// time, with non-negative stays and no overlapping visits.
pub fn validate_timeline(admissions: &[AdmissionRecord]) -> Result<(), CohortError> {
    for window in admissions.windows(2) {
        let (cur, next) = (&window[0], &window[1]);
        if next.patient_id != cur.patient_id {
            return Err(CohortError::MixedPatients {
                expected: cur.patient_id.clone(),
                found: next.patient_id.clone(),
            });
        }
        if next.admit_time < cur.admit_time {
            return Err(CohortError::UnsortedTimeline {
                admission_id: next.admission_id.clone(),
            });
        }
        if next.admit_time < cur.discharge_time {
            return Err(CohortError::OverlappingAdmissions {
                patient_id: cur.patient_id.clone(),
                first: cur.admission_id.clone(),
                second: next.admission_id.clone(),
            });
        }
    }
    for adm in admissions {
        if adm.discharge_time < adm.admit_time {
            return Err(CohortError::NegativeStay {
                admission_id: adm.admission_id.clone(),
            });
        }
    }
    Ok(())
}

/// Labels each admission of one patient timeline as a general readmission
/// case: true iff some admission of the same patient starts strictly after
/// this admission's discharge.
///
/// The timeline must be sorted ascending by admit time; overlapping
/// admissions are a data error.
pub fn label_general(
    admissions: &[AdmissionRecord],
) -> Result<BTreeMap<String, bool>, CohortError> {
    validate_timeline(admissions)?;
    let mut labels = BTreeMap::new();
    for adm in admissions {
        let followed = admissions
            .iter()
            .any(|later| later.admit_time > adm.discharge_time);
        labels.insert(adm.admission_id.clone(), followed);
    }
    Ok(labels)
}

/// Labels each admission as a 30-day readmission case: true iff the next
/// admission starts within 30 days of this admission's discharge, boundary
/// inclusive.
pub fn label_30day(admissions: &[AdmissionRecord]) -> Result<BTreeMap<String, bool>, CohortError> {
    validate_timeline(admissions)?;
    let mut labels = BTreeMap::new();
    for adm in admissions {
        let next_gap = admissions
            .iter()
            .filter(|later| later.admit_time > adm.discharge_time)
            .map(|later| later.admit_time - adm.discharge_time)
            .min();
        let within = matches!(next_gap, Some(gap) if gap <= THIRTY_DAYS_SECS);
        labels.insert(adm.admission_id.clone(), within);
    }
    Ok(labels)
}

/// Outcome of [`balance_undersample`].
#[derive(Debug, Clone)]
pub struct BalancedCohort {
    pub samples: Vec<CohortSample>,
    /// Set when negatives were the minority and positives were subsampled
    /// instead; callers should warn.
    pub subsampled_positives: bool,
}

/// Equalizes class counts for `task` by sampling the majority class down,
/// uniformly without replacement. All minority samples are retained and the
/// input order is preserved. Deterministic for a fixed seed.
pub fn balance_undersample(
    samples: &[CohortSample],
    task: LabelTask,
    seed: u64,
) -> Result<BalancedCohort, CohortError> {
    let n_pos = samples.iter().filter(|s| task.label_of(s)).count();
    let n_neg = samples.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(CohortError::InvalidArgument(String::from(
            "balancing needs at least one positive and one negative sample",
        )));
    }
    let subsampled_positives = n_neg < n_pos;
    let (majority_label, keep) = if subsampled_positives {
        (true, n_neg)
    } else {
        (false, n_pos)
    };

    let majority_idx: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| task.label_of(s) == majority_label)
        .map(|(i, _)| i)
        .collect();
    let mut rng = rng::stream(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, majority_idx.len(), keep).into_vec();
    chosen.sort_unstable();
    let kept_majority: Vec<usize> = chosen.into_iter().map(|i| majority_idx[i]).collect();

    let mut cursor = kept_majority.iter().peekable();
    let mut out = Vec::with_capacity(2 * keep);
    for (i, sample) in samples.iter().enumerate() {
        if task.label_of(sample) != majority_label {
            out.push(sample.clone());
        } else if cursor.peek() == Some(&&i) {
            cursor.next();
            out.push(sample.clone());
        }
    }
    Ok(BalancedCohort {
        samples: out,
        subsampled_positives,
    })
}

/// Splits samples into train and test ids, stratified by the task label so
/// the test set keeps the class balance. The test set takes
/// `floor(ratio * per-class count)` per class, minimum one. Returns
/// `(train_ids, test_ids)`, each in input order.
pub fn split_holdout(
    samples: &[CohortSample],
    task: LabelTask,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>), CohortError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CohortError::InvalidArgument(String::from(
            "holdout ratio must lie in (0, 1)",
        )));
    }
    if samples.len() < 10 {
        return Err(CohortError::InvalidArgument(String::from(
            "holdout split needs at least 10 samples",
        )));
    }

    let mut test_idx = Vec::new();
    let mut rng = rng::stream(seed);
    for class in [true, false] {
        let class_idx: Vec<usize> = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| task.label_of(s) == class)
            .map(|(i, _)| i)
            .collect();
        if class_idx.is_empty() {
            return Err(CohortError::InvalidArgument(String::from(
                "stratified holdout needs both classes present",
            )));
        }
        let n_test = ((ratio * class_idx.len() as f64) as usize).max(1);
        let mut chosen = rand::seq::index::sample(&mut rng, class_idx.len(), n_test).into_vec();
        chosen.sort_unstable();
        test_idx.extend(chosen.into_iter().map(|i| class_idx[i]));
    }
    test_idx.sort_unstable();

    let mut cursor = test_idx.iter().peekable();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, sample) in samples.iter().enumerate() {
        if cursor.peek() == Some(&&i) {
            cursor.next();
            test.push(sample.admission_id.clone());
        } else {
            train.push(sample.admission_id.clone());
        }
    }
    Ok((train, test))
}

/// Partitions training ids into `k` stratified folds whose sizes differ by
/// at most one. Ids arrive paired with their task label.
pub fn make_cv_folds(
    ids: &[(String, bool)],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<String>>, CohortError> {
    if k < 2 {
        return Err(CohortError::InvalidArgument(String::from(
            "cross-validation needs k >= 2",
        )));
    }
    if k > ids.len() {
        return Err(CohortError::InvalidArgument(String::from(
            "cross-validation needs k <= number of training samples",
        )));
    }

    let mut rng = rng::stream(seed);
    let mut folds: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    // Deal each class out cyclically, continuing the fold index across
    // classes so total fold sizes stay within one of each other.
    let mut next_fold = 0usize;
    for class in [true, false] {
        let mut class_idx: Vec<usize> = ids
            .iter()
            .enumerate()
            .filter(|(_, (_, label))| *label == class)
            .map(|(i, _)| i)
            .collect();
        class_idx.shuffle(&mut rng);
        for idx in class_idx {
            folds[next_fold].push(idx);
            next_fold = (next_fold + 1) % k;
        }
    }

    Ok(folds
        .into_iter()
        .map(|mut fold| {
            fold.sort_unstable();
            fold.into_iter().map(|i| ids[i].0.clone()).collect()
        })
        .collect())
}
