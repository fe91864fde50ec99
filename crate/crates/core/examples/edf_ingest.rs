//! Write a synthetic recording as EDF, read it back, and cut it into
//! labeled one-second windows.
//!
//! ```text
//! cargo run --example edf_ingest                # synthetic recording
//! cargo run --example edf_ingest -- rec.edf     # any uniform-rate EDF
//! ```

use std::path::PathBuf;

use seizure::ingestion::{label_windows, read_edf, write_edf, SeizureAnnotations};
use seizure::preprocessing::normalize_record;
use seizure::synth::{synthesize, SynthConfig};

fn main() -> seizure::Result<()> {
    let dir = std::env::temp_dir().join("seizure-edf-example");
    std::fs::create_dir_all(&dir).map_err(|e| seizure::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let (path, annotations) = match std::env::args().nth(1) {
        Some(p) => (PathBuf::from(p), SeizureAnnotations::default()),
        None => {
            let cfg = SynthConfig {
                patients: 1,
                seconds: 120,
                channels: 4,
                seed: 11,
                ..SynthConfig::default()
            };
            let patient = synthesize(&cfg)?.remove(0);
            let path = dir.join("synth01.edf");
            write_edf(&patient.record, &path)?;
            (path, patient.annotations)
        }
    };

    let record = read_edf(&path)?;
    println!(
        "{}: patient {}, {} channels at {} Hz, {} s",
        path.display(),
        record.patient_id,
        record.num_channels(),
        record.sample_rate(),
        record.duration()
    );
    println!("channels: {}", record.channel_labels.join(" "));

    let (normalized, stats) = normalize_record(&record);
    for (label, s) in record.channel_labels.iter().zip(&stats.channels).take(4) {
        println!(
            "  {label}: mean {:9.3}  sd {:8.3}  clamp [{:.2}, {:.2}]",
            s.mean, s.std, s.p_low, s.p_high
        );
    }

    let windows = label_windows(&normalized, &annotations);
    let seizure: Vec<usize> = windows
        .iter()
        .filter(|w| w.label == 1)
        .map(|w| w.window_index)
        .collect();
    println!(
        "{} windows, {} labeled seizure: {:?}",
        windows.len(),
        seizure.len(),
        seizure
    );
    Ok(())
}
