//! `synth`: generates an admissions file, a standalone notes file, and the
//! generator's own labels for later comparison against the pipeline.

use notecnn_core::synth::{self, SynthConfig};

use crate::config::{ExperimentConfig, OutputLayout};
use crate::error::{CliError, Result};
use crate::io::{self, AdmissionWire, GroundTruthWire, NoteFileLine, NoteWire};

pub fn run(config: &ExperimentConfig, patients_override: Option<usize>) -> Result<()> {
    let params = &config.synth;
    let patients = patients_override.unwrap_or(params.patients);
    let core_config = SynthConfig {
        n_patients: patients,
        admissions_per_patient: (params.admissions_min, params.admissions_max),
        readmit_30day_rate: params.readmit_30day_rate,
        note_length: (params.note_length_min, params.note_length_max),
        signal_tokens_pos: params.signal_tokens_pos.clone(),
        signal_tokens_neg: params.signal_tokens_neg.clone(),
        signal_probability: params.signal_probability,
        background_vocab: params.background_vocab,
        seed: config.experiment.seed,
    };
    let output = synth::generate(&core_config)?;

    let layout = OutputLayout::new(config.output_dir()?);
    std::fs::create_dir_all(layout.dir()).map_err(|e| CliError::in_file(layout.dir(), e))?;
    let provenance = super::provenance(config);

    let admissions: Vec<AdmissionWire> = output
        .admissions
        .iter()
        .map(|a| AdmissionWire::from_core(a, false))
        .collect();
    io::write_jsonl(&layout.admissions(), &provenance, &admissions)?;

    let notes: Vec<NoteFileLine> = output
        .admissions
        .iter()
        .flat_map(|a| {
            a.notes.iter().map(|n| {
                let wire = NoteWire::from_core(n);
                NoteFileLine {
                    admission_id: a.admission_id.clone(),
                    note_id: wire.note_id,
                    category: wire.category,
                    text: wire.text,
                }
            })
        })
        .collect();
    io::write_jsonl(&layout.notes(), &provenance, &notes)?;

    let truth: Vec<GroundTruthWire> = output
        .truth
        .iter()
        .map(|t| GroundTruthWire {
            admission_id: t.admission_id.clone(),
            label_general: t.label_general,
            label_thirty_day: t.label_30day,
        })
        .collect();
    io::write_jsonl(&layout.ground_truth(), &provenance, &truth)?;

    println!(
        "generated {} admissions for {} patients into {}",
        admissions.len(),
        patients,
        layout.dir().display()
    );
    Ok(())
}
