//! Single-patient 5:1:1 splits versus leave-one-patient-out, with the
//! majority-class baseline for reference.
//!
//! ```text
//! cargo run --release --example evaluation_protocols
//! ```

use seizure::commands::{featurize_record, metrics_csv, run_protocol, summary_text};
use seizure::config::{ClassifierChoice, RunConfig};
use seizure::evaluation::Protocol;
use seizure::synth::{synthesize, SynthConfig};

fn main() -> seizure::Result<()> {
    let cfg = SynthConfig {
        patients: 3,
        seconds: 300,
        channels: 8,
        seed: 9,
        ..SynthConfig::default()
    };
    let mut rows = Vec::new();
    for p in synthesize(&cfg)? {
        rows.extend(featurize_record(&p.record, &p.annotations)?);
    }

    for protocol in [Protocol::SinglePatient, Protocol::LeaveOneOut] {
        let run = RunConfig {
            classifier: ClassifierChoice::Lr,
            protocol,
            seed: 9,
            ..RunConfig::default()
        };
        let results = run_protocol(&run, rows.clone())?;
        println!("{}", summary_text(protocol, &results));
        print!("{}", metrics_csv(protocol, &results));
        println!();
    }
    Ok(())
}
