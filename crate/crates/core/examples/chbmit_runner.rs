//! Run a protocol over a local copy of the CHB-MIT Scalp EEG database.
//!
//! The data is not bundled. Point the runner at a directory containing the
//! `chbNN/` folders (each with its `chbNN-summary.txt` and `.edf` files):
//!
//! ```text
//! cargo run --release --example chbmit_runner -- /data/chb-mit dbn loo chb01 chb02 chb03
//! ```
//!
//! Arguments after the directory are the classifier (default `dbn`), the
//! protocol (`single` or `loo`, default `single`) and the patients to use
//! (default: every folder found). Seizure intervals come from the summary
//! files. Recordings whose channel count differs from the first one read
//! are skipped, since every window must have the same feature dimension.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use seizure::commands::{featurize_record, metrics_csv, run_protocol, summary_text, FeatureRow};
use seizure::config::RunConfig;
use seizure::ingestion::{read_edf, SeizureAnnotations};
use seizure::{Error, Result, FEATURES_PER_CHANNEL};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Seizure intervals per record id (file stem) from a `chbNN-summary.txt`.
fn parse_summary(text: &str) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut current = None;
    let mut start = None;
    let seconds = |line: &str| -> Option<f64> {
        let v = line.split(':').nth(1)?.trim();
        v.trim_end_matches("seconds").trim().parse().ok()
    };
    for line in text.lines().map(str::trim) {
        if let Some(name) = line.strip_prefix("File Name:") {
            let stem = name.trim().trim_end_matches(".edf").to_string();
            out.entry(stem.clone()).or_default();
            current = Some(stem);
        } else if line.starts_with("Seizure") && line.contains("Start Time") {
            start = seconds(line);
        } else if line.starts_with("Seizure") && line.contains("End Time") {
            if let (Some(rec), Some(s), Some(e)) = (&current, start.take(), seconds(line)) {
                out.entry(rec.clone()).or_default().push((s, e));
            }
        }
    }
    out
}

fn patient_rows(
    dir: &Path,
    patient: &str,
    channels: &mut Option<usize>,
) -> Result<Vec<FeatureRow>> {
    let summary_path = dir.join(format!("{patient}-summary.txt"));
    let summary = std::fs::read_to_string(&summary_path).map_err(io(&summary_path))?;
    let mut rows = Vec::new();
    for (record_id, intervals) in parse_summary(&summary) {
        let path = dir.join(format!("{record_id}.edf"));
        if !path.exists() {
            continue;
        }
        let mut record = match read_edf(&path) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let c = *channels.get_or_insert(record.num_channels());
        if record.num_channels() != c {
            eprintln!(
                "skipping {}: {} channels, expected {c}",
                path.display(),
                record.num_channels()
            );
            continue;
        }
        record.patient_id = patient.to_string();
        rows.extend(featurize_record(
            &record,
            &SeizureAnnotations::new(intervals)?,
        )?);
    }
    Ok(rows)
}

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(root) = args.next().map(PathBuf::from) else {
        eprintln!("usage: chbmit_runner DIR [CLASSIFIER] [single|loo] [PATIENT...]");
        std::process::exit(2);
    };
    let mut run = RunConfig::default();
    run.set("classifier", &args.next().unwrap_or_else(|| "dbn".into()))?;
    run.set("protocol", &args.next().unwrap_or_else(|| "single".into()))?;
    if let Ok(seed) = std::env::var("SEIZURE_SEED") {
        run.set("seed", &seed)?;
    }

    let mut patients: Vec<String> = args.collect();
    if patients.is_empty() {
        let entries = std::fs::read_dir(&root).map_err(io(&root))?;
        patients = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.starts_with("chb"))
            .collect();
        patients.sort();
    }

    let mut channels = None;
    let mut rows = Vec::new();
    for p in &patients {
        let r = patient_rows(&root.join(p), p, &mut channels)?;
        eprintln!(
            "{p}: {} windows, {} seizure",
            r.len(),
            r.iter().filter(|w| w.label == 1).count()
        );
        rows.extend(r);
    }
    if let Some(c) = channels {
        let dim = c * FEATURES_PER_CHANNEL;
        run.layers[0] = dim;
    }

    let results = run_protocol(&run, rows)?;
    println!("{}", summary_text(run.protocol, &results));
    print!("{}", metrics_csv(run.protocol, &results));
    Ok(())
}
