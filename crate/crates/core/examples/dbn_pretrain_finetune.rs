//! Greedy RBM pretraining followed by supervised finetuning, in both
//! finetune modes, on synthetic EEG features.
//!
//! ```text
//! cargo run --release --example dbn_pretrain_finetune
//! ```

use seizure::classifiers::Dataset;
use seizure::commands::featurize_record;
use seizure::dbn::{
    dbn_finetune, dbn_pretrain, to_matrix, FinetuneConfig, FinetuneMode, PretrainConfig,
    DEFAULT_LAYER_SIZES,
};
use seizure::evaluation::{compute_metrics, split_single_patient};
use seizure::preprocessing::MinMaxScaler;
use seizure::synth::{synthesize, SynthConfig};

fn main() -> seizure::Result<()> {
    let cfg = SynthConfig {
        patients: 1,
        seconds: 300,
        seed: 5,
        ..SynthConfig::default()
    };
    let patient = synthesize(&cfg)?.remove(0);
    let rows = featurize_record(&patient.record, &patient.annotations)?;
    let split = split_single_patient(&rows, 5, false)?;

    let raw: Vec<Vec<f64>> = split.train.iter().map(|r| r.features.clone()).collect();
    let scaler = MinMaxScaler::fit(&raw)?;
    let part = |rows: &[seizure::commands::FeatureRow]| -> seizure::Result<Dataset> {
        let v = rows
            .iter()
            .map(|r| scaler.apply(&r.features))
            .collect::<seizure::Result<Vec<_>>>()?;
        Dataset::new(v, rows.iter().map(|r| r.label).collect())
    };
    let (train, validation, test) = (
        part(&split.train)?,
        part(&split.validation)?,
        part(&split.test)?,
    );

    let x = to_matrix(train.vectors())?;
    let pretrain = PretrainConfig::default();
    let stack = dbn_pretrain(&DEFAULT_LAYER_SIZES, x.view(), &pretrain, 5)?;
    let mut input = x.clone();
    for (l, rbm) in stack.iter().enumerate() {
        println!(
            "layer {l}: {}x{}, reconstruction cross-entropy {:.3}",
            rbm.n_visible(),
            rbm.n_hidden(),
            rbm.reconstruction_cross_entropy(input.view())
        );
        input = rbm.hidden_probs_batch(input.view());
    }

    let test_x = to_matrix(test.vectors())?;
    for mode in [FinetuneMode::Full, FinetuneMode::Top] {
        let ft = FinetuneConfig {
            mode,
            ..FinetuneConfig::default()
        };
        let model = dbn_finetune(stack.clone(), &train, Some(&validation), &ft, 5)?;
        let m = compute_metrics(&model.predict_batch(test_x.view())?, test.labels())?;
        println!(
            "finetune {:<4}: test f1 {:.3}, accuracy {:.3}",
            mode.as_str(),
            m.f1,
            m.accuracy
        );
    }
    Ok(())
}
