//! Generate the five-patient synthetic corpus on disk (EDF plus
//! labels.csv) and featurize it the way the `featurize` command does.
//!
//! ```text
//! cargo run --release --example synthetic_study -- out_dir
//! ```

use std::path::PathBuf;

use seizure::commands::{feature_csv, featurize_inputs};
use seizure::config::RunConfig;
use seizure::synth::{synthgen, SynthConfig};

fn main() -> seizure::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("seizure-synth"), PathBuf::from);
    let edfs = synthgen(&SynthConfig::default(), &dir)?;
    let run = RunConfig {
        inputs: edfs,
        labels: Some(dir.join("labels.csv")),
        jobs: 2,
        ..RunConfig::default()
    };
    let rows = featurize_inputs(&run)?;
    let out = dir.join("features.csv");
    std::fs::write(&out, feature_csv(&rows)).map_err(|e| seizure::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let positives = rows.iter().filter(|r| r.label == 1).count();
    println!(
        "{} windows ({positives} seizure) written to {}",
        rows.len(),
        out.display()
    );
    Ok(())
}
