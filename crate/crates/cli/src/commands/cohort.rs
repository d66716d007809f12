//! `cohort`: labels every admission timeline, keeps heart-failure
//! admissions with a usable discharge summary, balances classes for the
//! configured task, and writes the cohort, split, and statistics files.

use std::collections::BTreeMap;

use notecnn_core::cohort::{self, CohortSample};

use crate::config::{ExperimentConfig, OutputLayout};
use crate::error::{CliError, Result};
use crate::io::{self, CohortSampleWire, CohortStats, CohortStatsFile, SplitFile};

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let admissions_path = config.admissions_path()?;
    let records = io::load_admissions(admissions_path, config.paths.notes.as_deref())?;
    if records.is_empty() {
        return Err(CliError::in_file(admissions_path, "no admissions found"));
    }
    let timelines = io::group_timelines(records);

    let mut label_general = BTreeMap::new();
    let mut label_thirty = BTreeMap::new();
    for timeline in timelines.values() {
        label_general.extend(cohort::label_general(timeline)?);
        label_thirty.extend(cohort::label_30day(timeline)?);
    }

    let mut stats = CohortStats {
        admissions: 0,
        admissions_with_summary: 0,
        general_positive: 0,
        general_positive_with_summary: 0,
        thirty_day_positive: 0,
        thirty_day_positive_with_summary: 0,
    };
    let mut samples = Vec::new();
    for timeline in timelines.values() {
        for admission in timeline {
            if !cohort::is_heart_failure(admission) {
                continue;
            }
            let general = label_general[&admission.admission_id];
            let thirty = label_thirty[&admission.admission_id];
            let summary = cohort::select_note(admission).filter(|n| !n.text.trim().is_empty());
            stats.admissions += 1;
            if general {
                stats.general_positive += 1;
            }
            if thirty {
                stats.thirty_day_positive += 1;
            }
            if let Some(note) = summary {
                stats.admissions_with_summary += 1;
                if general {
                    stats.general_positive_with_summary += 1;
                }
                if thirty {
                    stats.thirty_day_positive_with_summary += 1;
                }
                samples.push(CohortSample {
                    admission_id: admission.admission_id.clone(),
                    patient_id: admission.patient_id.clone(),
                    note_text: note.text.clone(),
                    label_general: general,
                    label_30day: thirty,
                });
            }
        }
    }
    if samples.is_empty() {
        return Err(CliError::data(
            "empty cohort: no heart-failure admissions with a usable discharge summary",
        ));
    }

    let task = config.experiment.task.to_core();
    let seed = config.experiment.seed;
    let balanced = cohort::balance_undersample(&samples, task, seed)?;
    if balanced.subsampled_positives {
        eprintln!("warning: positives outnumber negatives; subsampled the positive class");
    }
    let (train, test) = cohort::split_holdout(
        &balanced.samples,
        task,
        config.cohort.holdout_ratio,
        seed,
    )?;
    let label_of: BTreeMap<&str, bool> = balanced
        .samples
        .iter()
        .map(|s| (s.admission_id.as_str(), task.label_of(s)))
        .collect();
    let train_labeled: Vec<(String, bool)> = train
        .iter()
        .map(|id| (id.clone(), label_of[id.as_str()]))
        .collect();
    let cv_folds = cohort::make_cv_folds(&train_labeled, config.cohort.cv_folds, seed)?;

    let layout = OutputLayout::new(config.output_dir()?);
    std::fs::create_dir_all(layout.dir()).map_err(|e| CliError::in_file(layout.dir(), e))?;
    let provenance = super::provenance(config);

    let wires: Vec<CohortSampleWire> = samples.iter().map(CohortSampleWire::from_core).collect();
    io::write_jsonl(&layout.cohort(), &provenance, &wires)?;

    let split = SplitFile {
        provenance: provenance.clone(),
        seed,
        train,
        test,
        cv_folds,
    };
    io::write_json(&layout.split(), &split)?;

    let stats_file = CohortStatsFile {
        provenance,
        stats,
    };
    io::write_json(&layout.cohort_stats(), &stats_file)?;

    println!("admissions                       {}", stats.admissions);
    println!("  with discharge summary         {}", stats.admissions_with_summary);
    println!("general readmission              {}", stats.general_positive);
    println!("  with discharge summary         {}", stats.general_positive_with_summary);
    println!("30-day readmission               {}", stats.thirty_day_positive);
    println!("  with discharge summary         {}", stats.thirty_day_positive_with_summary);
    println!(
        "balanced {} samples ({} train / {} test) for task {}",
        split.train.len() + split.test.len(),
        split.train.len(),
        split.test.len(),
        config.experiment.task.tag()
    );
    Ok(())
}
