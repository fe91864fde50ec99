//! Train a model, store it as an SZDT file, reload it and check that the
//! predictions agree.
//!
//! ```text
//! cargo run --release --example model_container
//! ```

use seizure::commands::{featurize_record, train};
use seizure::config::{ClassifierChoice, RunConfig};
use seizure::container::ModelFile;
use seizure::synth::{synthesize, SynthConfig};

fn main() -> seizure::Result<()> {
    let cfg = SynthConfig {
        patients: 1,
        seconds: 200,
        channels: 4,
        seed: 3,
        ..SynthConfig::default()
    };
    let p = synthesize(&cfg)?.remove(0);
    let rows = featurize_record(&p.record, &p.annotations)?;

    let path = std::env::temp_dir().join("seizure-example.szdt");
    for classifier in [ClassifierChoice::Svm, ClassifierChoice::Dbn] {
        let mut run = RunConfig {
            classifier,
            seed: 3,
            ..RunConfig::default()
        };
        run.layers = vec![36, 50, 50];
        let fitted = train(&run, rows.clone())?;
        fitted.file.save(&path)?;
        let loaded = ModelFile::load(&path)?;
        let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        let agree = rows
            .iter()
            .filter(|r| loaded.classify(&r.features).ok() == fitted.file.classify(&r.features).ok())
            .count();
        println!(
            "{}: {bytes} bytes, validation f1 {:.3}, reloaded model agrees on {agree}/{} windows",
            classifier.as_str(),
            fitted.validation.map_or(f64::NAN, |m| m.f1),
            rows.len()
        );
    }
    Ok(())
}
