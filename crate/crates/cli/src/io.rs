//! On-disk record formats and readers/writers.
//!
//! Admissions, notes, cohort samples, and ground-truth labels travel as
//! JSON lines; the split is a single JSON document. Files written by this
//! tool start with a `{"provenance": ...}` line carrying the config hash
//! and seed; readers skip such a line when present so externally produced
//! files parse too. Timestamps are ISO-8601 strings on disk and UTC unix
//! seconds in memory.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use notecnn_core::cohort::{AdmissionRecord, CohortSample, DatasetSplit, NoteCategory, NoteRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use time::format_description::well_known::{Iso8601, Rfc3339};
use time::{OffsetDateTime, PrimitiveDateTime};

use crate::error::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::Digest;
    let digest = sha2::Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvenanceLine {
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteCategoryWire {
    DischargeSummary,
    Other,
}

impl From<NoteCategoryWire> for NoteCategory {
    fn from(w: NoteCategoryWire) -> Self {
        match w {
            NoteCategoryWire::DischargeSummary => NoteCategory::DischargeSummary,
            NoteCategoryWire::Other => NoteCategory::Other,
        }
    }
}

impl From<NoteCategory> for NoteCategoryWire {
    fn from(c: NoteCategory) -> Self {
        match c {
            NoteCategory::DischargeSummary => NoteCategoryWire::DischargeSummary,
            NoteCategory::Other => NoteCategoryWire::Other,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoteWire {
    pub note_id: String,
    pub category: NoteCategoryWire,
    pub text: String,
}

impl NoteWire {
    fn to_core(&self) -> NoteRecord {
        NoteRecord {
            note_id: self.note_id.clone(),
            category: self.category.into(),
            text: self.text.clone(),
        }
    }

    pub fn from_core(n: &NoteRecord) -> Self {
        Self {
            note_id: n.note_id.clone(),
            category: n.category.into(),
            text: n.text.clone(),
        }
    }
}

/// One admission per line; `notes` may be empty when notes live in a
/// separate file keyed by `admission_id`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissionWire {
    pub patient_id: String,
    pub admission_id: String,
    pub admit_time: String,
    pub discharge_time: String,
    pub icd9_codes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<NoteWire>,
}

impl AdmissionWire {
    fn to_core(&self) -> Result<AdmissionRecord> {
        Ok(AdmissionRecord {
            patient_id: self.patient_id.clone(),
            admission_id: self.admission_id.clone(),
            admit_time: parse_timestamp(&self.admit_time)?,
            discharge_time: parse_timestamp(&self.discharge_time)?,
            icd9_codes: self.icd9_codes.clone(),
            notes: self.notes.iter().map(NoteWire::to_core).collect(),
        })
    }

    pub fn from_core(a: &AdmissionRecord, include_notes: bool) -> Self {
        Self {
            patient_id: a.patient_id.clone(),
            admission_id: a.admission_id.clone(),
            admit_time: format_timestamp(a.admit_time),
            discharge_time: format_timestamp(a.discharge_time),
            icd9_codes: a.icd9_codes.clone(),
            notes: if include_notes {
                a.notes.iter().map(NoteWire::from_core).collect()
            } else {
                Vec::new()
            },
        }
    }
}

/// A note in a standalone notes file, keyed back to its admission.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoteFileLine {
    pub admission_id: String,
    pub note_id: String,
    pub category: NoteCategoryWire,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortSampleWire {
    pub admission_id: String,
    pub patient_id: String,
    pub note_text: String,
    pub label_general: bool,
    #[serde(rename = "label_30day")]
    pub label_thirty_day: bool,
}

impl CohortSampleWire {
    pub fn to_core(&self) -> CohortSample {
        CohortSample {
            admission_id: self.admission_id.clone(),
            patient_id: self.patient_id.clone(),
            note_text: self.note_text.clone(),
            label_general: self.label_general,
            label_30day: self.label_thirty_day,
        }
    }

    pub fn from_core(s: &CohortSample) -> Self {
        Self {
            admission_id: s.admission_id.clone(),
            patient_id: s.patient_id.clone(),
            note_text: s.note_text.clone(),
            label_general: s.label_general,
            label_thirty_day: s.label_30day,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthWire {
    pub admission_id: String,
    pub label_general: bool,
    #[serde(rename = "label_30day")]
    pub label_thirty_day: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFile {
    pub provenance: Provenance,
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub cv_folds: Vec<Vec<String>>,
}

impl SplitFile {
    pub fn to_core(&self) -> DatasetSplit {
        DatasetSplit {
            train: self.train.clone(),
            test: self.test.clone(),
            cv_folds: self.cv_folds.clone(),
            seed: self.seed,
        }
    }

    /// Fingerprint of the training partition: the seed, train ids, and
    /// fold layout, deliberately excluding test ids. Checkpoints record
    /// this hash, proving training never depended on the test partition.
    pub fn train_fingerprint(&self) -> String {
        let mut data = Vec::new();
        data.extend_from_slice(&self.seed.to_le_bytes());
        for id in &self.train {
            data.extend_from_slice(id.as_bytes());
            data.push(b'\n');
        }
        for fold in &self.cv_folds {
            data.push(0);
            for id in fold {
                data.extend_from_slice(id.as_bytes());
                data.push(b'\n');
            }
        }
        sha256_hex(&data)
    }

    /// Train and test must not share admission ids.
    pub fn validate(&self, path: &Path) -> Result<()> {
        let train: BTreeSet<&String> = self.train.iter().collect();
        for id in &self.test {
            if train.contains(id) {
                return Err(CliError::in_file(
                    path,
                    format!("admission {id} appears in both train and test partitions"),
                ));
            }
        }
        Ok(())
    }
}

/// The six cohort statistics: total, general-positive, and 30-day-positive
/// admission counts, each overall and restricted to admissions that carry
/// a usable discharge summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortStats {
    pub admissions: u64,
    pub admissions_with_summary: u64,
    pub general_positive: u64,
    pub general_positive_with_summary: u64,
    #[serde(rename = "30day_positive")]
    pub thirty_day_positive: u64,
    #[serde(rename = "30day_positive_with_summary")]
    pub thirty_day_positive_with_summary: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortStatsFile {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub stats: CohortStats,
}

pub fn parse_timestamp(s: &str) -> Result<i64> {
    if let Ok(t) = OffsetDateTime::parse(s, &Rfc3339) {
        return Ok(t.unix_timestamp());
    }
    if let Ok(t) = OffsetDateTime::parse(s, &Iso8601::DEFAULT) {
        return Ok(t.unix_timestamp());
    }
    if let Ok(t) = PrimitiveDateTime::parse(s, &Iso8601::DEFAULT) {
        return Ok(t.assume_utc().unix_timestamp());
    }
    Err(CliError::data(format!("invalid ISO-8601 timestamp: {s:?}")))
}

pub fn format_timestamp(unix_secs: i64) -> String {
    OffsetDateTime::from_unix_timestamp(unix_secs)
        .expect("timestamp in representable range")
        .format(&Rfc3339)
        .expect("RFC 3339 formatting")
}

pub fn write_jsonl<T: Serialize>(path: &Path, provenance: &Provenance, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::in_file(path, e))?;
    let mut w = BufWriter::new(file);
    let head = ProvenanceLine {
        provenance: provenance.clone(),
    };
    let io_err = |e| CliError::in_file(path, e);
    writeln!(w, "{}", serde_json::to_string(&head).expect("serializable")).map_err(io_err)?;
    for row in rows {
        writeln!(w, "{}", serde_json::to_string(row).expect("serializable")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a JSON-lines file, skipping a leading provenance line when
/// present and reporting parse failures with their line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<Provenance>, Vec<T>)> {
    let file = std::fs::File::open(path).map_err(|e| CliError::in_file(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut provenance = None;
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::in_file(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            if let Ok(head) = serde_json::from_str::<ProvenanceLine>(&line) {
                provenance = Some(head.provenance);
                continue;
            }
        }
        let row: T =
            serde_json::from_str(&line).map_err(|e| CliError::at_line(path, idx + 1, e))?;
        rows.push(row);
    }
    Ok((provenance, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::in_file(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
    serde_json::from_str(&raw).map_err(|e| CliError::in_file(path, e))
}

/// Loads admissions, merging in a standalone notes file when given, and
/// rejects duplicate admission ids and notes for unknown admissions.
pub fn load_admissions(
    admissions_path: &Path,
    notes_path: Option<&Path>,
) -> Result<Vec<AdmissionRecord>> {
    let (_, wires): (_, Vec<AdmissionWire>) = read_jsonl(admissions_path)?;
    let mut records = Vec::with_capacity(wires.len());
    let mut index_of = BTreeMap::new();
    for wire in &wires {
        let record = wire.to_core()?;
        if index_of
            .insert(record.admission_id.clone(), records.len())
            .is_some()
        {
            return Err(CliError::in_file(
                admissions_path,
                format!("duplicate admission_id {}", record.admission_id),
            ));
        }
        records.push(record);
    }
    if let Some(notes_path) = notes_path {
        let (_, notes): (_, Vec<NoteFileLine>) = read_jsonl(notes_path)?;
        for note in notes {
            let Some(&i) = index_of.get(&note.admission_id) else {
                return Err(CliError::in_file(
                    notes_path,
                    format!("note {} references unknown admission {}", note.note_id, note.admission_id),
                ));
            };
            records[i].notes.push(NoteRecord {
                note_id: note.note_id,
                category: note.category.into(),
                text: note.text,
            });
        }
    }
    Ok(records)
}

/// Loads a plain-text embedding file: a `count dim` header line, then one
/// `token v1 ... vdim` line per word, whitespace-separated.
pub fn load_embedding_file(
    path: &Path,
    expected_dim: usize,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let raw = std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
    let mut lines = raw.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::in_file(path, "empty embedding file"))?;
    let mut head = header.split_whitespace();
    let (count, dim) = match (head.next(), head.next(), head.next()) {
        (Some(c), Some(d), None) => {
            let count: usize = c
                .parse()
                .map_err(|_| CliError::at_line(path, 1, "bad word count in header"))?;
            let dim: usize = d
                .parse()
                .map_err(|_| CliError::at_line(path, 1, "bad dimension in header"))?;
            (count, dim)
        }
        _ => return Err(CliError::at_line(path, 1, "header must be `count dim`")),
    };
    if dim != expected_dim {
        return Err(CliError::in_file(
            path,
            format!("embedding dimension {dim} does not match configured {expected_dim}"),
        ));
    }
    let mut table = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| CliError::at_line(path, idx + 1, "missing token"))?;
        let mut vector = Vec::with_capacity(dim);
        for field in fields {
            let value: f64 = field.parse().map_err(|_| {
                CliError::at_line(path, idx + 1, format!("unparsable float {field:?}"))
            })?;
            vector.push(value);
        }
        if vector.len() != dim {
            return Err(CliError::at_line(
                path,
                idx + 1,
                format!("expected {dim} values, found {}", vector.len()),
            ));
        }
        if table.insert(token.to_string(), vector).is_some() {
            return Err(CliError::at_line(path, idx + 1, format!("duplicate token {token:?}")));
        }
    }
    if table.len() != count {
        return Err(CliError::in_file(
            path,
            format!("header declares {count} words, file has {}", table.len()),
        ));
    }
    Ok(table)
}

/// Groups admissions into per-patient timelines ordered by admit time,
/// breaking exact ties by admission id so the order is reproducible.
pub fn group_timelines(records: Vec<AdmissionRecord>) -> BTreeMap<String, Vec<AdmissionRecord>> {
    let mut timelines: BTreeMap<String, Vec<AdmissionRecord>> = BTreeMap::new();
    for record in records {
        timelines.entry(record.patient_id.clone()).or_default().push(record);
    }
    for timeline in timelines.values_mut() {
        timeline.sort_by(|a, b| {
            a.admit_time
                .cmp(&b.admit_time)
                .then_with(|| a.admission_id.cmp(&b.admission_id))
        });
    }
    timelines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance {
            config_hash: "abc123".to_string(),
            seed: 9,
        }
    }

    #[test]
    fn timestamp_round_trip_is_utc() {
        let secs = parse_timestamp("2011-03-12T10:30:00Z").unwrap();
        assert_eq!(format_timestamp(secs), "2011-03-12T10:30:00Z");
    }

    #[test]
    fn timestamp_offsets_normalize_to_utc() {
        let zulu = parse_timestamp("2011-03-12T10:30:00Z").unwrap();
        let offset = parse_timestamp("2011-03-12T05:30:00-05:00").unwrap();
        assert_eq!(zulu, offset);
        let naive = parse_timestamp("2011-03-12T10:30:00").unwrap();
        assert_eq!(zulu, naive);
    }

    #[test]
    fn timestamp_garbage_is_rejected() {
        assert!(parse_timestamp("last tuesday").is_err());
        assert!(parse_timestamp("2011-13-40T99:00:00Z").is_err());
    }

    #[test]
    fn jsonl_round_trip_keeps_provenance_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.jsonl");
        let rows = vec![
            GroundTruthWire {
                admission_id: "A000001".to_string(),
                label_general: true,
                label_thirty_day: false,
            },
            GroundTruthWire {
                admission_id: "A000002".to_string(),
                label_general: false,
                label_thirty_day: false,
            },
        ];
        write_jsonl(&path, &provenance(), &rows).unwrap();
        let (head, back): (_, Vec<GroundTruthWire>) = read_jsonl(&path).unwrap();
        assert_eq!(head, Some(provenance()));
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].admission_id, "A000001");
        assert!(back[0].label_general);
    }

    #[test]
    fn jsonl_without_provenance_still_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.jsonl");
        std::fs::write(
            &path,
            "{\"admission_id\":\"A1\",\"label_general\":true,\"label_30day\":true}\n",
        )
        .unwrap();
        let (head, rows): (_, Vec<GroundTruthWire>) = read_jsonl(&path).unwrap();
        assert!(head.is_none());
        assert_eq!(rows.len(), 1);
        assert!(rows[0].label_thirty_day);
    }

    #[test]
    fn jsonl_parse_error_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"admission_id\":\"A1\",\"label_general\":true,\"label_30day\":true}\nnot json\n",
        )
        .unwrap();
        let err = read_jsonl::<GroundTruthWire>(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.jsonl:2:"), "unexpected message: {msg}");
    }

    #[test]
    fn admission_wire_parses_timestamps_and_defaults_notes() {
        let line = r#"{
            "patient_id": "P1", "admission_id": "A1",
            "admit_time": "2011-01-01T00:00:00Z",
            "discharge_time": "2011-01-03T00:00:00Z",
            "icd9_codes": ["428.0"]
        }"#;
        let wire: AdmissionWire = serde_json::from_str(line).unwrap();
        let record = wire.to_core().unwrap();
        assert_eq!(record.discharge_time - record.admit_time, 2 * 86_400);
        assert!(record.notes.is_empty());
    }

    #[test]
    fn notes_file_merges_into_admissions() {
        let dir = tempfile::tempdir().unwrap();
        let admissions = dir.path().join("admissions.jsonl");
        let notes = dir.path().join("notes.jsonl");
        let wire = AdmissionWire {
            patient_id: "P1".to_string(),
            admission_id: "A1".to_string(),
            admit_time: "2011-01-01T00:00:00Z".to_string(),
            discharge_time: "2011-01-02T00:00:00Z".to_string(),
            icd9_codes: vec!["428.0".to_string()],
            notes: Vec::new(),
        };
        write_jsonl(&admissions, &provenance(), &[wire]).unwrap();
        let note = NoteFileLine {
            admission_id: "A1".to_string(),
            note_id: "S1".to_string(),
            category: NoteCategoryWire::DischargeSummary,
            text: "stable on discharge".to_string(),
        };
        write_jsonl(&notes, &provenance(), &[note]).unwrap();
        let records = load_admissions(&admissions, Some(&notes)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].notes.len(), 1);
        assert_eq!(records[0].notes[0].note_id, "S1");
        assert_eq!(records[0].notes[0].category, NoteCategory::DischargeSummary);
    }

    #[test]
    fn orphan_note_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let admissions = dir.path().join("admissions.jsonl");
        let notes = dir.path().join("notes.jsonl");
        write_jsonl::<AdmissionWire>(&admissions, &provenance(), &[]).unwrap();
        let note = NoteFileLine {
            admission_id: "A404".to_string(),
            note_id: "S1".to_string(),
            category: NoteCategoryWire::Other,
            text: "x".to_string(),
        };
        write_jsonl(&notes, &provenance(), &[note]).unwrap();
        let err = load_admissions(&admissions, Some(&notes)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("A404"));
    }

    #[test]
    fn duplicate_admission_id_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let admissions = dir.path().join("admissions.jsonl");
        let wire = AdmissionWire {
            patient_id: "P1".to_string(),
            admission_id: "A1".to_string(),
            admit_time: "2011-01-01T00:00:00Z".to_string(),
            discharge_time: "2011-01-02T00:00:00Z".to_string(),
            icd9_codes: Vec::new(),
            notes: Vec::new(),
        };
        write_jsonl(&admissions, &provenance(), &[wire.clone(), wire]).unwrap();
        let err = load_admissions(&admissions, None).unwrap_err();
        assert!(err.to_string().contains("duplicate admission_id"));
    }

    #[test]
    fn timelines_group_by_patient_and_sort_by_admit() {
        let mk = |patient: &str, admission: &str, admit: i64| AdmissionRecord {
            patient_id: patient.to_string(),
            admission_id: admission.to_string(),
            admit_time: admit,
            discharge_time: admit + 10,
            icd9_codes: Vec::new(),
            notes: Vec::new(),
        };
        let timelines = group_timelines(vec![
            mk("P2", "A3", 500),
            mk("P1", "A2", 300),
            mk("P1", "A1", 100),
        ]);
        assert_eq!(timelines.len(), 2);
        let p1: Vec<&str> = timelines["P1"].iter().map(|a| a.admission_id.as_str()).collect();
        assert_eq!(p1, vec!["A1", "A2"]);
    }

    #[test]
    fn split_file_rejects_train_test_overlap() {
        let split = SplitFile {
            provenance: provenance(),
            seed: 9,
            train: vec!["A1".to_string(), "A2".to_string()],
            test: vec!["A2".to_string()],
            cv_folds: Vec::new(),
        };
        let err = split.validate(Path::new("split.json")).unwrap_err();
        assert!(err.to_string().contains("A2"));
        let ok = SplitFile {
            test: vec!["A3".to_string()],
            ..split
        };
        ok.validate(Path::new("split.json")).unwrap();
    }

    #[test]
    fn embedding_file_parses_word2vec_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 3\nheart 0.1 0.2 0.3\nrate -1 0 1\n").unwrap();
        let table = load_embedding_file(&path, 3).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table["heart"], vec![0.1, 0.2, 0.3]);
        assert_eq!(table["rate"], vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn embedding_dim_mismatch_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "1 3\nheart 0.1 0.2 0.3\n").unwrap();
        let err = load_embedding_file(&path, 5).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("dimension 3"));
    }

    #[test]
    fn embedding_bad_float_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "2 2\nheart 0.1 0.2\nrate 0.3 oops\n").unwrap();
        let err = load_embedding_file(&path, 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vectors.txt:3:"), "{msg}");
        assert!(msg.contains("oops"), "{msg}");
    }

    #[test]
    fn embedding_count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        std::fs::write(&path, "3 2\nheart 0.1 0.2\n").unwrap();
        let err = load_embedding_file(&path, 2).unwrap_err();
        assert!(err.to_string().contains("declares 3"));
    }

    #[test]
    fn train_fingerprint_ignores_test_ids_only() {
        let base = SplitFile {
            provenance: provenance(),
            seed: 9,
            train: vec!["A1".to_string(), "A2".to_string()],
            test: vec!["A3".to_string()],
            cv_folds: vec![vec!["A1".to_string()], vec!["A2".to_string()]],
        };
        let mut tampered_test = base.clone();
        tampered_test.test = vec!["A9".to_string()];
        assert_eq!(base.train_fingerprint(), tampered_test.train_fingerprint());
        let mut other_train = base.clone();
        other_train.train[0] = "A7".to_string();
        assert_ne!(base.train_fingerprint(), other_train.train_fingerprint());
        let mut other_folds = base.clone();
        other_folds.cv_folds.reverse();
        assert_ne!(base.train_fingerprint(), other_folds.train_fingerprint());
    }

    #[test]
    fn cohort_sample_wire_uses_30day_field_name() {
        let sample = CohortSample {
            admission_id: "A1".to_string(),
            patient_id: "P1".to_string(),
            note_text: "text".to_string(),
            label_general: true,
            label_30day: false,
        };
        let json = serde_json::to_string(&CohortSampleWire::from_core(&sample)).unwrap();
        assert!(json.contains("\"label_30day\":false"), "{json}");
        let back: CohortSampleWire = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_core(), sample);
    }

    #[test]
    fn stats_file_serializes_flat_with_30day_names() {
        let file = CohortStatsFile {
            provenance: provenance(),
            stats: CohortStats {
                admissions: 10,
                admissions_with_summary: 9,
                general_positive: 4,
                general_positive_with_summary: 4,
                thirty_day_positive: 2,
                thirty_day_positive_with_summary: 1,
            },
        };
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"30day_positive\":2"), "{json}");
        assert!(json.contains("\"admissions\":10"), "{json}");
        let back: CohortStatsFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.stats, file.stats);
    }
}
