//! KNN, condensed NN, the three SVM kernels and logistic regression on one
//! synthetic patient, scored on a held-out 1/7 of its windows.
//!
//! ```text
//! cargo run --release --example baseline_classifiers
//! ```

use seizure::classifiers::condensed::cnn_condense;
use seizure::classifiers::{lr_train, svm_train, Dataset, Kernel, KnnModel, LrConfig, SvmConfig};
use seizure::commands::featurize_record;
use seizure::evaluation::{compute_metrics, split_single_patient};
use seizure::preprocessing::MinMaxScaler;
use seizure::synth::{synthesize, SynthConfig};

fn dataset(
    rows: &[seizure::commands::FeatureRow],
    scaler: &MinMaxScaler,
) -> seizure::Result<Dataset> {
    let v = rows
        .iter()
        .map(|r| scaler.apply(&r.features))
        .collect::<seizure::Result<Vec<_>>>()?;
    Dataset::new(v, rows.iter().map(|r| r.label).collect())
}

fn main() -> seizure::Result<()> {
    let cfg = SynthConfig {
        patients: 1,
        seconds: 400,
        seed: 2,
        ..SynthConfig::default()
    };
    let patient = synthesize(&cfg)?.remove(0);
    let rows = featurize_record(&patient.record, &patient.annotations)?;
    let split = split_single_patient(&rows, 2, false)?;

    let raw: Vec<Vec<f64>> = split.train.iter().map(|r| r.features.clone()).collect();
    let scaler = MinMaxScaler::fit(&raw)?;
    let train = dataset(&split.train, &scaler)?;
    let test = dataset(&split.test, &scaler)?;
    println!(
        "{} training windows, {} test windows, dim {}",
        train.len(),
        test.len(),
        train.dim()
    );

    let report =
        |name: &str, predict: &dyn Fn(&[f64]) -> seizure::Result<u8>| -> seizure::Result<()> {
            let preds = test
                .vectors()
                .iter()
                .map(|x| predict(x))
                .collect::<seizure::Result<Vec<_>>>()?;
            let m = compute_metrics(&preds, test.labels())?;
            println!(
                "{name:<16} f1 {:.3}  precision {:.3}  recall {:.3}",
                m.f1, m.precision, m.recall
            );
            Ok(())
        };

    for k in [3, 5, 7] {
        let knn = KnnModel::new(train.clone(), k)?;
        report(&format!("knn k={k}"), &|x| knn.classify(x))?;
    }

    let store = cnn_condense(&train, 2);
    println!(
        "condensed store keeps {} of {} windows",
        store.len(),
        train.len()
    );
    let cnn = KnnModel::new(store, 1)?;
    report("cnn 1-nn", &|x| cnn.classify(x))?;

    let dim = train.dim();
    for kernel in [
        Kernel::rbf(dim),
        Kernel::polynomial(dim),
        Kernel::sigmoid(dim),
    ] {
        let svm = svm_train(&train, &SvmConfig::new(kernel))?;
        let name = format!("svm {} ({} sv)", kernel.name(), svm.support_vectors.len());
        report(&name, &|x| svm.classify(x))?;
    }

    let lr = lr_train(&train, &LrConfig::default())?;
    report("logistic", &|x| {
        seizure::classifiers::lr_classify(&lr, x).map(|(l, _)| l)
    })?;
    Ok(())
}
