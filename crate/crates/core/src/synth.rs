//! Seeded synthetic cohort generator. Builds patient timelines whose
//! readmission labels are known by construction, attaches one discharge
//! summary per admission (Zipf-distributed background text plus optional
//! class-signal tokens), and returns the intended labels alongside the
//! records so an independent labeler can be checked against them.
//!
//! This module never calls the labeling functions of [`crate::cohort`];
//! agreement between the two is established by tests, not shared code.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::RngExt;
use rand_pcg::Pcg64;

use crate::cohort::{AdmissionRecord, NoteCategory, NoteRecord, HEART_FAILURE_ICD9, THIRTY_DAYS_SECS};
use crate::{math, rng};

const SECS_PER_DAY: i64 = 86_400;
/// 2011-03-13T07:06:40Z; any fixed origin works, this one keeps generated
/// timestamps in a plausible clinical range.
const BASE_TIME: i64 = 1_300_000_000;
/// Zipf exponent for the background token distribution.
const ZIPF_EXPONENT: f64 = 1.1;
/// Fraction of 30-day-positive gaps pinned to exactly 30 days, so the
/// boundary case is always represented.
const BOUNDARY_GAP_RATE: f64 = 0.05;
/// Common diagnoses outside the heart-failure set, used as filler codes.
const OTHER_ICD9: [&str; 8] = [
    "250.00", "272.4", "401.9", "414.01", "530.81", "584.9", "585.9", "599.0",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_patients: usize,
    /// Admissions per patient, drawn uniformly from this inclusive range.
    pub admissions_per_patient: (u32, u32),
    /// Probability that a non-final admission is followed within 30 days.
    pub readmit_30day_rate: f64,
    /// Background tokens per note, drawn uniformly from this inclusive range.
    pub note_length: (usize, usize),
    /// Tokens planted in notes whose intended 30-day label is positive.
    pub signal_tokens_pos: Vec<String>,
    /// Tokens planted in notes whose intended 30-day label is negative.
    pub signal_tokens_neg: Vec<String>,
    /// Independent planting probability for each signal token.
    pub signal_probability: f64,
    /// Size of the Zipf background vocabulary (`w00001`, `w00002`, ...).
    pub background_vocab: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_patients: 100,
            admissions_per_patient: (1, 3),
            readmit_30day_rate: 0.3,
            note_length: (40, 120),
            signal_tokens_pos: Vec::new(),
            signal_tokens_neg: Vec::new(),
            signal_probability: 0.0,
            background_vocab: 500,
            seed: 0,
        }
    }
}

/// The labels an admission was generated to carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthLabel {
    pub admission_id: String,
    pub label_general: bool,
    pub label_30day: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// Sorted per patient by admit time; patients in generation order.
    pub admissions: Vec<AdmissionRecord>,
    /// One entry per admission, in the same order.
    pub truth: Vec<GroundTruthLabel>,
}

fn validate(config: &SynthConfig) -> Result<(), SynthError> {
    let err = |msg: String| Err(SynthError::InvalidArgument(msg));
    if config.n_patients == 0 {
        return err(String::from("n_patients must be at least 1"));
    }
    let (adm_min, adm_max) = config.admissions_per_patient;
    if adm_min == 0 || adm_min > adm_max {
        return err(format!(
            "admissions_per_patient range ({adm_min}, {adm_max}) must satisfy 1 <= min <= max"
        ));
    }
    if !(0.0..=1.0).contains(&config.readmit_30day_rate) {
        return err(format!(
            "readmit_30day_rate {} outside [0, 1]",
            config.readmit_30day_rate
        ));
    }
    if config.readmit_30day_rate > 0.0 && adm_max < 2 {
        return err(String::from(
            "readmit_30day_rate > 0 needs patients with at least 2 admissions",
        ));
    }
    let (len_min, len_max) = config.note_length;
    if len_min == 0 || len_min > len_max {
        return err(format!(
            "note_length range ({len_min}, {len_max}) must satisfy 1 <= min <= max"
        ));
    }
    if !(0.0..=1.0).contains(&config.signal_probability) {
        return err(format!(
            "signal_probability {} outside [0, 1]",
            config.signal_probability
        ));
    }
    if config.background_vocab == 0 {
        return err(String::from("background_vocab must be at least 1"));
    }
    for token in config.signal_tokens_pos.iter().chain(&config.signal_tokens_neg) {
        if token.is_empty() {
            return err(String::from("signal tokens must be non-empty"));
        }
    }
    Ok(())
}

/// Zipf(`exponent`) sampler over ranks `0..size` via an inverse-CDF table.
struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    fn new(size: usize, exponent: f64) -> Self {
        let mut cumulative = Vec::with_capacity(size);
        let mut total = 0.0;
        for rank in 1..=size {
            total += 1.0 / math::powf(rank as f64, exponent);
            cumulative.push(total);
        }
        for c in &mut cumulative {
            *c /= total;
        }
        Self { cumulative }
    }

    fn sample(&self, rng: &mut Pcg64) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn background_token(rank: usize) -> String {
    format!("w{:05}", rank + 1)
}

fn note_text(
    config: &SynthConfig,
    zipf: &ZipfTable,
    label_30day: bool,
    rng: &mut Pcg64,
) -> String {
    let (len_min, len_max) = config.note_length;
    let n_background = rng.random_range(len_min..=len_max);
    let mut tokens: Vec<String> = (0..n_background)
        .map(|_| background_token(zipf.sample(rng)))
        .collect();
    let signals = if label_30day {
        &config.signal_tokens_pos
    } else {
        &config.signal_tokens_neg
    };
    for signal in signals {
        if config.signal_probability > 0.0 && rng.random_bool(config.signal_probability) {
            let at = rng.random_range(0..=tokens.len());
            tokens.insert(at, signal.clone());
        }
    }
    tokens.join(" ")
}

fn icd9_codes(rng: &mut Pcg64) -> Vec<String> {
    let qualifying = HEART_FAILURE_ICD9[rng.random_range(0..HEART_FAILURE_ICD9.len())];
    let n_extra = rng.random_range(0..=3);
    let mut codes: Vec<String> = (0..n_extra)
        .map(|_| String::from(OTHER_ICD9[rng.random_range(0..OTHER_ICD9.len())]))
        .collect();
    let at = rng.random_range(0..=codes.len());
    codes.insert(at, String::from(qualifying));
    codes
}

/// The gap in seconds between a discharge and the next admission,
/// realizing (or avoiding) the 30-day window.
fn gap_secs(label_30day: bool, rng: &mut Pcg64) -> i64 {
    if label_30day {
        if rng.random_bool(BOUNDARY_GAP_RATE) {
            THIRTY_DAYS_SECS
        } else {
            rng.random_range(1..=THIRTY_DAYS_SECS)
        }
    } else {
        rng.random_range(THIRTY_DAYS_SECS + 1..=365 * SECS_PER_DAY)
    }
}

/// Generates the full cohort described by `config`. Output is a pure
/// function of the config; each patient draws from its own substream, so
/// growing `n_patients` appends patients without disturbing earlier ones.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    validate(config)?;
    let zipf = ZipfTable::new(config.background_vocab, ZIPF_EXPONENT);
    let (adm_min, adm_max) = config.admissions_per_patient;

    let mut admissions = Vec::new();
    let mut truth = Vec::new();
    let mut admission_counter: u64 = 0;

    for patient_index in 0..config.n_patients {
        let mut rng = rng::substream(config.seed, patient_index as u64);
        let patient_id = format!("P{:05}", patient_index + 1);
        let n_adm = rng.random_range(adm_min..=adm_max) as usize;
        let mut admit_time = BASE_TIME + rng.random_range(0..365 * SECS_PER_DAY);

        for adm_index in 0..n_adm {
            admission_counter += 1;
            let admission_id = format!("A{admission_counter:06}");
            let discharge_time =
                admit_time + SECS_PER_DAY * rng.random_range(1..=14);

            let has_next = adm_index + 1 < n_adm;
            let label_30day = has_next
                && config.readmit_30day_rate > 0.0
                && rng.random_bool(config.readmit_30day_rate);

            let text = note_text(config, &zipf, label_30day, &mut rng);
            let note = NoteRecord {
                note_id: format!("S{admission_counter:06}"),
                category: NoteCategory::DischargeSummary,
                text,
            };

            admissions.push(AdmissionRecord {
                patient_id: patient_id.clone(),
                admission_id: admission_id.clone(),
                admit_time,
                discharge_time,
                icd9_codes: icd9_codes(&mut rng),
                notes: alloc::vec![note],
            });
            truth.push(GroundTruthLabel {
                admission_id,
                label_general: has_next,
                label_30day,
            });

            if has_next {
                admit_time = discharge_time + gap_secs(label_30day, &mut rng);
            }
        }
    }

    Ok(SynthOutput { admissions, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn base_config() -> SynthConfig {
        SynthConfig {
            n_patients: 50,
            admissions_per_patient: (1, 4),
            readmit_30day_rate: 0.5,
            note_length: (10, 30),
            background_vocab: 100,
            seed: 11,
            ..SynthConfig::default()
        }
    }

    fn by_patient(admissions: &[AdmissionRecord]) -> BTreeMap<String, Vec<AdmissionRecord>> {
        let mut grouped: BTreeMap<String, Vec<AdmissionRecord>> = BTreeMap::new();
        for admission in admissions {
            grouped
                .entry(admission.patient_id.clone())
                .or_default()
                .push(admission.clone());
        }
        grouped
    }

    #[test]
    fn generation_is_deterministic() {
        let config = base_config();
        assert_eq!(generate(&config).unwrap(), generate(&config).unwrap());
    }

    #[test]
    fn adding_patients_preserves_existing_ones() {
        let small = generate(&base_config()).unwrap();
        let large = generate(&SynthConfig {
            n_patients: 60,
            ..base_config()
        })
        .unwrap();
        assert_eq!(small.admissions, large.admissions[..small.admissions.len()]);
    }

    #[test]
    fn zero_rate_means_no_positive_30day_labels() {
        let output = generate(&SynthConfig {
            readmit_30day_rate: 0.0,
            ..base_config()
        })
        .unwrap();
        assert!(output.truth.iter().all(|t| !t.label_30day));
        assert!(output.truth.iter().any(|t| t.label_general));
    }

    #[test]
    fn rate_one_makes_every_followed_admission_a_30day_readmission() {
        let output = generate(&SynthConfig {
            readmit_30day_rate: 1.0,
            admissions_per_patient: (2, 2),
            ..base_config()
        })
        .unwrap();
        for (i, t) in output.truth.iter().enumerate() {
            let is_first_of_pair = i % 2 == 0;
            assert_eq!(t.label_general, is_first_of_pair);
            assert_eq!(t.label_30day, is_first_of_pair);
        }
    }

    #[test]
    fn timelines_pass_cohort_validation() {
        let output = generate(&base_config()).unwrap();
        for timeline in by_patient(&output.admissions).values() {
            cohort::validate_timeline(timeline).unwrap();
        }
    }

    #[test]
    fn independent_labeler_agrees_with_ground_truth() {
        let output = generate(&SynthConfig {
            n_patients: 200,
            seed: 3,
            ..base_config()
        })
        .unwrap();
        let expected: BTreeMap<&str, (bool, bool)> = output
            .truth
            .iter()
            .map(|t| (t.admission_id.as_str(), (t.label_general, t.label_30day)))
            .collect();
        for timeline in by_patient(&output.admissions).values() {
            let general = cohort::label_general(timeline).unwrap();
            let thirty = cohort::label_30day(timeline).unwrap();
            for admission in timeline {
                let (want_general, want_30day) = expected[admission.admission_id.as_str()];
                assert_eq!(general[&admission.admission_id], want_general);
                assert_eq!(thirty[&admission.admission_id], want_30day);
            }
        }
    }

    #[test]
    fn some_positive_gaps_sit_exactly_on_the_boundary() {
        let output = generate(&SynthConfig {
            n_patients: 1000,
            admissions_per_patient: (2, 2),
            readmit_30day_rate: 1.0,
            note_length: (1, 2),
            ..base_config()
        })
        .unwrap();
        let mut boundary = 0usize;
        let mut positives = 0usize;
        for timeline in by_patient(&output.admissions).values() {
            let gap = timeline[1].admit_time - timeline[0].discharge_time;
            assert!(gap >= 1 && gap <= THIRTY_DAYS_SECS);
            positives += 1;
            if gap == THIRTY_DAYS_SECS {
                boundary += 1;
            }
        }
        assert!(boundary > 0);
        assert!((boundary as f64) < 0.15 * positives as f64);
    }

    #[test]
    fn every_admission_has_one_discharge_summary_and_a_qualifying_code() {
        let output = generate(&base_config()).unwrap();
        for admission in &output.admissions {
            assert_eq!(admission.notes.len(), 1);
            assert_eq!(admission.notes[0].category, NoteCategory::DischargeSummary);
            assert!(!admission.notes[0].text.is_empty());
            assert!(cohort::is_heart_failure(admission));
            let qualifying = admission
                .icd9_codes
                .iter()
                .filter(|c| HEART_FAILURE_ICD9.contains(&c.as_str()))
                .count();
            assert_eq!(qualifying, 1);
        }
    }

    #[test]
    fn note_lengths_stay_in_range() {
        let config = SynthConfig {
            note_length: (5, 8),
            signal_tokens_pos: vec!["posmark".to_string()],
            signal_tokens_neg: vec!["negmark".to_string()],
            signal_probability: 1.0,
            ..base_config()
        };
        let output = generate(&config).unwrap();
        for admission in &output.admissions {
            let n_tokens = admission.notes[0].text.split(' ').count();
            assert!((6..=9).contains(&n_tokens), "unexpected length {n_tokens}");
        }
    }

    #[test]
    fn signal_tokens_follow_the_intended_label() {
        let config = SynthConfig {
            signal_tokens_pos: vec!["posmark".to_string()],
            signal_tokens_neg: vec!["negmark".to_string()],
            signal_probability: 1.0,
            ..base_config()
        };
        let output = generate(&config).unwrap();
        for (admission, t) in output.admissions.iter().zip(&output.truth) {
            let text = &admission.notes[0].text;
            let tokens: Vec<&str> = text.split(' ').collect();
            assert_eq!(tokens.contains(&"posmark"), t.label_30day);
            assert_eq!(tokens.contains(&"negmark"), !t.label_30day);
        }
    }

    #[test]
    fn zero_signal_probability_plants_nothing() {
        let config = SynthConfig {
            signal_tokens_pos: vec!["posmark".to_string()],
            signal_tokens_neg: vec!["negmark".to_string()],
            signal_probability: 0.0,
            ..base_config()
        };
        let output = generate(&config).unwrap();
        for admission in &output.admissions {
            let text = &admission.notes[0].text;
            assert!(!text.contains("posmark") && !text.contains("negmark"));
        }
    }

    #[test]
    fn background_follows_a_decreasing_rank_distribution() {
        let output = generate(&SynthConfig {
            n_patients: 300,
            note_length: (50, 50),
            ..base_config()
        })
        .unwrap();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for admission in &output.admissions {
            for token in admission.notes[0].text.split(' ') {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        let count = |t: &str| counts.get(t).copied().unwrap_or(0);
        assert!(count("w00001") > count("w00020"));
        assert!(count("w00001") > 2 * count("w00050"));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            SynthConfig { n_patients: 0, ..base_config() },
            SynthConfig { admissions_per_patient: (0, 2), ..base_config() },
            SynthConfig { admissions_per_patient: (3, 2), ..base_config() },
            SynthConfig { readmit_30day_rate: 1.5, ..base_config() },
            SynthConfig { readmit_30day_rate: -0.1, ..base_config() },
            SynthConfig { note_length: (0, 5), ..base_config() },
            SynthConfig { note_length: (9, 5), ..base_config() },
            SynthConfig { signal_probability: 2.0, ..base_config() },
            SynthConfig { background_vocab: 0, ..base_config() },
            SynthConfig {
                signal_tokens_pos: vec![String::new()],
                ..base_config()
            },
        ];
        for config in bad {
            assert!(generate(&config).is_err(), "accepted {config:?}");
        }
    }

    #[test]
    fn positive_rate_with_single_admission_patients_is_infeasible() {
        let config = SynthConfig {
            readmit_30day_rate: 0.5,
            admissions_per_patient: (1, 1),
            ..base_config()
        };
        let err = generate(&config).unwrap_err();
        assert!(matches!(err, SynthError::InvalidArgument(_)));
        assert!(generate(&SynthConfig {
            readmit_30day_rate: 0.0,
            admissions_per_patient: (1, 1),
            ..base_config()
        })
        .is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn generated_timelines_always_validate(
            n_patients in 1usize..8,
            adm_min in 1u32..3,
            extra in 0u32..3,
            rate in 0.0f64..=1.0,
            seed in 0u64..1000,
        ) {
            let config = SynthConfig {
                n_patients,
                admissions_per_patient: (adm_min, adm_min + extra),
                readmit_30day_rate: if adm_min + extra >= 2 { rate } else { 0.0 },
                note_length: (3, 6),
                background_vocab: 20,
                seed,
                ..SynthConfig::default()
            };
            let output = generate(&config).unwrap();
            prop_assert_eq!(output.admissions.len(), output.truth.len());
            for timeline in by_patient(&output.admissions).values() {
                prop_assert!(cohort::validate_timeline(timeline).is_ok());
            }
        }
    }
}
