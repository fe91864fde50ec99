//! The pipeline stages behind each CLI subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::classifiers::{cnn_condense, lr_train, svm_train, Dataset, Kernel, KnnModel, SvmConfig};
use crate::config::{ClassifierChoice, KernelChoice, RunConfig};
use crate::container::{ModelFile, RunInfo, TrainedModel};
use crate::costmodel::{relative_report, CostParams, CostReport};
use crate::dbn::dbn_train;
use crate::error::{Error, Result};
use crate::evaluation::{
    compute_metrics, majority_baseline, split_leave_one_out, split_single_patient, Labeled,
    Metrics, Protocol, Split,
};
use crate::features::window_features;
use crate::ingestion::{
    label_windows, read_annotations, read_recording, Record, SeizureAnnotations,
};
use crate::preprocessing::{normalize_record, MinMaxScaler};
use crate::synth::{synthgen, SynthConfig};
use crate::FeatureVector;

/// One featurized window.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub patient_id: String,
    pub window_index: usize,
    pub label: u8,
    pub features: FeatureVector,
}

impl Labeled for FeatureRow {
    fn label(&self) -> u8 {
        self.label
    }

    fn patient_id(&self) -> &str {
        &self.patient_id
    }
}

/// Run `f` on a pool of `jobs` threads.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Normalize, window, label and featurize one recording.
pub fn featurize_record(
    record: &Record,
    annotations: &SeizureAnnotations,
) -> Result<Vec<FeatureRow>> {
    let (normalized, _) = normalize_record(record);
    label_windows(&normalized, annotations)
        .into_par_iter()
        .map(|w| {
            Ok(FeatureRow {
                features: window_features(&w.samples)?,
                patient_id: w.patient_id,
                window_index: w.window_index,
                label: w.label,
            })
        })
        .collect()
}

/// Featurize every input recording of `config`, in input order.
pub fn featurize_inputs(config: &RunConfig) -> Result<Vec<FeatureRow>> {
    if config.inputs.is_empty() {
        return Err(Error::EmptyInput("no input recordings"));
    }
    let labels = match &config.labels {
        Some(path) if path.exists() => Some(read_annotations(path)?),
        Some(path) => {
            eprintln!(
                "warning: label file {} not found; all windows labeled 0",
                path.display()
            );
            None
        }
        None => {
            eprintln!("warning: no label file given; all windows labeled 0");
            None
        }
    };
    let none = SeizureAnnotations::default();
    let mut rows = Vec::new();
    for path in &config.inputs {
        let record = read_recording(path, config.sample_rate)?;
        let ann = labels
            .as_ref()
            .and_then(|l| l.get(&record.record_id))
            .unwrap_or(&none);
        let featurized = with_jobs(config.jobs, || featurize_record(&record, ann))?;
        rows.extend(featurized?);
    }
    Ok(rows)
}

pub fn feature_csv(rows: &[FeatureRow]) -> String {
    let dim = rows.first().map_or(0, |r| r.features.len());
    let mut out = String::from("patient_id,window_index,label");
    for j in 0..dim {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{},{}", r.patient_id, r.window_index, r.label).unwrap();
        for v in &r.features {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_feature_csv(path: &Path) -> Result<Vec<FeatureRow>> {
    let shown = path.display().to_string();
    let parse_err = |message: String| Error::Parse {
        path: shown.clone(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    let dim = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .len()
        .checked_sub(3)
        .ok_or_else(|| parse_err("expected patient_id,window_index,label,f0.. columns".into()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let row = i + 2;
        let cell = |column: usize| Error::CsvCell {
            path: shown.clone(),
            row,
            column: column + 1,
            value: rec[column].to_string(),
        };
        let label: u8 = rec[2].trim().parse().map_err(|_| cell(2))?;
        if label > 1 {
            return Err(cell(2));
        }
        let features = (3..rec.len())
            .map(|c| rec[c].trim().parse::<f64>().map_err(|_| cell(c)))
            .collect::<Result<Vec<_>>>()?;
        debug_assert_eq!(features.len(), dim);
        rows.push(FeatureRow {
            patient_id: rec[0].to_string(),
            window_index: rec[1].trim().parse().map_err(|_| cell(1))?,
            label,
            features,
        });
    }
    Ok(rows)
}

/// Feature rows from `config.features` when set, otherwise from the recordings.
pub fn load_rows(config: &RunConfig) -> Result<Vec<FeatureRow>> {
    match &config.features {
        Some(path) => read_feature_csv(path),
        None => featurize_inputs(config),
    }
}

pub fn group_by_patient(rows: Vec<FeatureRow>) -> BTreeMap<String, Vec<FeatureRow>> {
    let mut map: BTreeMap<String, Vec<FeatureRow>> = BTreeMap::new();
    for r in rows {
        map.entry(r.patient_id.clone()).or_default().push(r);
    }
    map
}

fn dataset(rows: &[FeatureRow], scaler: &MinMaxScaler) -> Result<Dataset> {
    let vectors = rows
        .iter()
        .map(|r| scaler.apply(&r.features))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(vectors, rows.iter().map(|r| r.label).collect())
}

/// A fitted model with its validation score.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub file: ModelFile,
    pub validation: Option<Metrics>,
}

/// Fit the scaler and the configured classifier on `train`.
pub fn fit_classifier(
    config: &RunConfig,
    train: &[FeatureRow],
    validation: &[FeatureRow],
    seed: u64,
) -> Result<Fitted> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training partition"));
    }
    let vectors: Vec<FeatureVector> = train.iter().map(|r| r.features.clone()).collect();
    let scaler = MinMaxScaler::fit(&vectors)?;
    let train_set = dataset(train, &scaler)?;
    if !train_set.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let val_set = if validation.is_empty() {
        None
    } else {
        Some(dataset(validation, &scaler)?)
    };
    let dim = train_set.dim();

    let model = match config.classifier {
        ClassifierChoice::Knn => TrainedModel::Knn(KnnModel::new(train_set, config.k)?),
        ClassifierChoice::Cnn => {
            let store = cnn_condense(&train_set, seed);
            TrainedModel::Cnn(KnnModel::new(store, config.cnn_k)?)
        }
        ClassifierChoice::Svm => {
            let s = &config.svm;
            let gamma = s.gamma.unwrap_or(1.0 / dim as f64);
            let kernel = match s.kernel {
                KernelChoice::Rbf => Kernel::Rbf { gamma },
                KernelChoice::Polynomial => Kernel::Polynomial {
                    gamma,
                    degree: s.degree,
                    coef0: s.coef0,
                },
                KernelChoice::Sigmoid => Kernel::Sigmoid {
                    gamma,
                    coef0: s.coef0,
                },
            };
            let svm = SvmConfig {
                c_reg: s.c_reg,
                tol: s.tol,
                ..SvmConfig::new(kernel)
            };
            TrainedModel::Svm(svm_train(&train_set, &svm)?)
        }
        ClassifierChoice::Lr => TrainedModel::Lr(lr_train(&train_set, &config.lr)?),
        ClassifierChoice::Dbn => {
            if config.layers[0] != dim {
                return Err(Error::DimensionMismatch {
                    expected: config.layers[0],
                    found: dim,
                });
            }
            TrainedModel::Dbn(dbn_train(
                &config.layers,
                &train_set,
                val_set.as_ref(),
                &config.pretrain,
                &config.finetune,
                seed,
            )?)
        }
    };

    let validation = match &val_set {
        Some(v) => {
            let preds = v
                .vectors()
                .iter()
                .map(|x| model.classify(x))
                .collect::<Result<Vec<_>>>()?;
            Some(compute_metrics(&preds, v.labels())?)
        }
        None => None,
    };
    Ok(Fitted {
        file: ModelFile {
            model,
            scaler: Some(scaler),
            run: None,
        },
        validation,
    })
}

/// Partition under the configured protocol with `patient` as the split or
/// held-out patient.
pub fn split_for(
    config: &RunConfig,
    patients: &BTreeMap<String, Vec<FeatureRow>>,
    patient: &str,
) -> Result<Split<FeatureRow>> {
    match config.protocol {
        Protocol::SinglePatient => {
            let rows = patients
                .get(patient)
                .ok_or_else(|| Error::UnknownPatient(patient.to_string()))?;
            split_single_patient(rows, config.seed, config.contiguous)
        }
        Protocol::LeaveOneOut => {
            split_leave_one_out(patients, patient, config.seed, config.contiguous)
        }
    }
}

fn chosen_patient(
    config: &RunConfig,
    patients: &BTreeMap<String, Vec<FeatureRow>>,
) -> Result<String> {
    match (&config.patient, patients.len()) {
        (Some(p), _) => Ok(p.clone()),
        (None, 1) if config.protocol == Protocol::SinglePatient => {
            Ok(patients.keys().next().unwrap().clone())
        }
        _ => Err(Error::Config(
            "`patient` must name the patient to split or hold out".into(),
        )),
    }
}

/// Train one model under the configured protocol.
pub fn train(config: &RunConfig, rows: Vec<FeatureRow>) -> Result<Fitted> {
    let patients = group_by_patient(rows);
    let patient = chosen_patient(config, &patients)?;
    let split = split_for(config, &patients, &patient)?;
    let mut fitted = fit_classifier(config, &split.train, &split.validation, config.seed)?;
    fitted.file.run = Some(RunInfo {
        protocol: config.protocol,
        contiguous: config.contiguous,
        seed: config.seed,
        patient,
    });
    Ok(fitted)
}

/// Outcome on one patient's test partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientResult {
    pub patient: String,
    pub classifier: String,
    pub metrics: Metrics,
    pub baseline: Metrics,
    /// `(window_index, label, prediction)`
    pub predictions: Vec<(usize, u8, u8)>,
}

fn score(file: &ModelFile, patient: &str, test: &[FeatureRow]) -> Result<PatientResult> {
    let predictions = test
        .iter()
        .map(|r| Ok((r.window_index, r.label, file.classify(&r.features)?)))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<u8> = predictions.iter().map(|p| p.1).collect();
    let preds: Vec<u8> = predictions.iter().map(|p| p.2).collect();
    Ok(PatientResult {
        patient: patient.to_string(),
        classifier: file.model.name().to_string(),
        metrics: compute_metrics(&preds, &labels)?,
        baseline: majority_baseline(&labels)?,
        predictions,
    })
}

/// Train and test on every patient under the configured protocol.
pub fn run_protocol(config: &RunConfig, rows: Vec<FeatureRow>) -> Result<Vec<PatientResult>> {
    let patients = group_by_patient(rows);
    let ids: Vec<&String> = match &config.patient {
        Some(p) => vec![
            patients
                .get_key_value(p)
                .ok_or_else(|| Error::UnknownPatient(p.clone()))?
                .0,
        ],
        None => patients.keys().collect(),
    };
    let one = |id: &String| -> Result<PatientResult> {
        let split = split_for(config, &patients, id)?;
        let fitted = fit_classifier(config, &split.train, &split.validation, config.seed)?;
        score(&fitted.file, id, &split.test)
    };
    match config.protocol {
        Protocol::LeaveOneOut => {
            with_jobs(config.jobs, || ids.par_iter().map(|id| one(id)).collect())?
        }
        Protocol::SinglePatient => ids.into_iter().map(one).collect(),
    }
}

/// Score a saved model on the test partition it was split from.
pub fn evaluate_model(
    config: &RunConfig,
    file: &ModelFile,
    rows: Vec<FeatureRow>,
) -> Result<PatientResult> {
    let run = file
        .run
        .as_ref()
        .ok_or_else(|| Error::Config("model file records no training run".into()))?;
    if run.protocol != config.protocol {
        return Err(Error::Config(format!(
            "protocol mismatch: model was trained under `{}`, evaluation asks for `{}`",
            run.protocol.as_str(),
            config.protocol.as_str()
        )));
    }
    if let Some(p) = &config.patient {
        if *p != run.patient {
            return Err(Error::Config(format!(
                "patient mismatch: model was trained for {:?}, evaluation asks for {p:?}",
                run.patient
            )));
        }
    }
    let patients = group_by_patient(rows);
    let replay = RunConfig {
        seed: run.seed,
        contiguous: run.contiguous,
        ..config.clone()
    };
    let split = split_for(&replay, &patients, &run.patient)?;
    if let Some(first) = split.test.first() {
        if first.features.len() != file.model.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: file.model.input_dim(),
                found: first.features.len(),
            });
        }
    }
    score(file, &run.patient, &split.test)
}

fn metric_line(out: &mut String, protocol: &str, classifier: &str, patient: &str, m: &Metrics) {
    writeln!(
        out,
        "{protocol},{classifier},{patient},{},{},{},{}",
        m.precision, m.recall, m.f1, m.accuracy
    )
    .unwrap();
}

/// `protocol,classifier,patient,precision,recall,f1,accuracy`, with a
/// `baseline` row after each patient.
pub fn metrics_csv(protocol: Protocol, results: &[PatientResult]) -> String {
    let mut out = String::from("protocol,classifier,patient,precision,recall,f1,accuracy\n");
    for r in results {
        metric_line(
            &mut out,
            protocol.as_str(),
            &r.classifier,
            &r.patient,
            &r.metrics,
        );
        metric_line(
            &mut out,
            protocol.as_str(),
            "baseline",
            &r.patient,
            &r.baseline,
        );
    }
    out
}

pub fn predictions_csv(protocol: Protocol, results: &[PatientResult]) -> String {
    let mut out = String::from("protocol,classifier,patient,window_index,label,prediction\n");
    for r in results {
        for (w, l, p) in &r.predictions {
            writeln!(
                out,
                "{},{},{},{w},{l},{p}",
                protocol.as_str(),
                r.classifier,
                r.patient
            )
            .unwrap();
        }
    }
    out
}

pub fn summary_text(protocol: Protocol, results: &[PatientResult]) -> String {
    let mut out = format!(
        "{:<12} {:<10} {:>9} {:>9} {:>9} {:>9} {:>11}\n",
        "patient", "classifier", "precision", "recall", "f1", "accuracy", "baseline"
    );
    for r in results {
        let m = &r.metrics;
        writeln!(
            out,
            "{:<12} {:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>11.4}",
            r.patient, r.classifier, m.precision, m.recall, m.f1, m.accuracy, r.baseline.accuracy
        )
        .unwrap();
    }
    if !results.is_empty() {
        let n = results.len() as f64;
        let mean = |f: fn(&Metrics) -> f64| results.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
        let base = results.iter().map(|r| r.baseline.accuracy).sum::<f64>() / n;
        writeln!(
            out,
            "{:<12} {:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>11.4}",
            "mean",
            protocol.as_str(),
            mean(|m| m.precision),
            mean(|m| m.recall),
            mean(|m| m.f1),
            mean(|m| m.accuracy),
            base
        )
        .unwrap();
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("`{what}` is required")))
}

pub fn cmd_synthgen(config: &SynthConfig, dir: &Path) -> Result<String> {
    let paths = synthgen(config, dir)?;
    Ok(format!(
        "wrote {} recordings and labels.csv to {}\n",
        paths.len(),
        dir.display()
    ))
}

/// Write the feature CSV; with `config.model` set, its scaler is applied first.
pub fn cmd_featurize(config: &RunConfig) -> Result<String> {
    let output = required(&config.output, "output")?;
    let mut rows = featurize_inputs(config)?;
    if let Some(model) = &config.model {
        let file = ModelFile::load(model)?;
        if let Some(scaler) = &file.scaler {
            for r in &mut rows {
                r.features = scaler.apply(&r.features)?;
            }
        }
    }
    write_file(output, &feature_csv(&rows))?;
    let dim = rows.first().map_or(0, |r| r.features.len());
    Ok(format!(
        "wrote {} windows × {dim} features to {}\n",
        rows.len(),
        output.display()
    ))
}

pub fn cmd_train(config: &RunConfig) -> Result<String> {
    let output = required(&config.output, "output")?;
    let fitted = train(config, load_rows(config)?)?;
    fitted.file.save(output)?;
    let mut msg = format!(
        "{} model written to {}\n",
        fitted.file.model.name(),
        output.display()
    );
    match fitted.validation {
        Some(m) => writeln!(
            msg,
            "validation f1 {:.4} (accuracy {:.4})",
            m.f1, m.accuracy
        )
        .unwrap(),
        None => msg.push_str("no validation windows\n"),
    }
    Ok(msg)
}

/// Evaluate a saved model (`config.model`) or run the full protocol study.
pub fn cmd_evaluate(config: &RunConfig) -> Result<String> {
    let rows = load_rows(config)?;
    let results = match &config.model {
        Some(path) => vec![evaluate_model(config, &ModelFile::load(path)?, rows)?],
        None => run_protocol(config, rows)?,
    };
    if let Some(path) = &config.output {
        write_file(path, &metrics_csv(config.protocol, &results))?;
    }
    if let Some(path) = &config.predictions {
        write_file(path, &predictions_csv(config.protocol, &results))?;
    }
    Ok(summary_text(config.protocol, &results))
}

/// Cost table; `actual` adds the exact size of a trained DBN. Returns the
/// text table and the CSV.
pub fn cmd_cost_report(params: &CostParams, actual: Option<&Path>) -> Result<(String, String)> {
    let mut report: CostReport = relative_report(params)?;
    if let Some(path) = actual {
        match ModelFile::load(path)?.model {
            TrainedModel::Dbn(m) => report.add_actual_dbn(&m),
            other => {
                return Err(Error::Config(format!(
                    "--actual expects a DBN model, {} holds {}",
                    path.display(),
                    other.name()
                )))
            }
        }
    }
    Ok((report.to_text(), report.to_csv()))
}
