//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::Rng;

use common::*;
use seizure::classifiers::condensed::cnn_condense_indices;
use seizure::classifiers::logistic::lr_loss_and_gradient;
use seizure::classifiers::{Dataset, KnnModel};
use seizure::commands::{self, FeatureRow, PatientResult};
use seizure::config::{ClassifierChoice, RunConfig};
use seizure::container::ModelFile;
use seizure::costmodel::{relative_report, CostParams};
use seizure::dbn::{rbm_cd1_update_with_uniforms, rbm_init, rbm_train, to_matrix, FinetuneMode};
use seizure::evaluation::{majority_baseline, Protocol};
use seizure::features::channel_features;
use seizure::preprocessing::MinMaxScaler;
use seizure::rng::{stream_rng, Stream};
use seizure::synth::{synthgen, SynthConfig};

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

// 1 ------------------------------------------------------------------------

fn cost_model() -> Outcome {
    let report = relative_report(&CostParams::default()).unwrap();
    let ratio = |label: &str| {
        let r = report.row(label).unwrap();
        (r.computation_ratio.unwrap(), r.memory_ratio.unwrap())
    };
    let (knn_c, knn_m) = ratio("KNN");
    let (cnn_c, cnn_m) = ratio("CNN");
    let (svm_c, svm_m) = ratio("SVM");
    let (dbn_c, dbn_m) = ratio("DBN");
    let checks = [
        within(knn_c, 1096.5, 0.001),
        within(cnn_c, 274.8, 0.001),
        within(svm_c, 1.086, 0.001),
        within(dbn_c, 30.0, 0.05),
        within(knn_m, 10_000.0, 0.01),
        within(cnn_m, 2_500.0, 0.01),
        within(svm_m, 502.5, 0.01),
        within(dbn_m, 413.0, 0.01),
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "ops KNN {knn_c:.2} CNN {cnn_c:.2} SVM {svm_c:.4} DBN {dbn_c:.2}; \
             memory KNN {knn_m:.1} CNN {cnn_m:.1} SVM {svm_m:.1} DBN {dbn_m:.1}"
        ),
    )
}

// 2 ------------------------------------------------------------------------

fn feature_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(SEED);
    let mut mismatches = 0;
    let mut sentinels = 0;
    for t in 0..1000 {
        let x = random_window(&mut r, 256, t);
        let got = channel_features(&x).to_array();
        let want = oracle_features(&x);
        for f in 0..9 {
            if want[f] == 0.0 && [4, 5, 6, 7].contains(&f) {
                sentinels += 1;
                if got[f] != 0.0 {
                    mismatches += 1;
                }
            } else if !rel_close(got[f], want[f], 1e-9) {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!(
            "1000 windows, {mismatches} mismatches, {sentinels} sentinel values, {elapsed:.2?}"
        ),
    )
}

// 3 ------------------------------------------------------------------------

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut r = rng(SEED);
    let mut lr_worst = 0.0f64;
    for _ in 0..20 {
        let data = random_dataset(&mut r, 30, 4);
        let theta: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let (_, gw, gb) = lr_loss_and_gradient(&theta[..4], theta[4], &data);
        let analytic: Vec<f64> = gw.into_iter().chain([gb]).collect();
        let numeric = numeric_gradient(&theta, 1e-5, |t| {
            lr_loss_and_gradient(&t[..4], t[4], &data).0
        });
        lr_worst = lr_worst.max(max_rel_error(&analytic, &numeric));
    }
    let dbn_worst = (0..20).map(dbn_gradient_error).fold(0.0f64, f64::max);
    let elapsed = start.elapsed();
    outcome(
        lr_worst <= 1e-5 && dbn_worst <= 1e-5 && elapsed < Duration::from_secs(10),
        format!("LR max rel error {lr_worst:.2e}, DBN 4-3-2-2 {dbn_worst:.2e}, {elapsed:.2?}"),
    )
}

// 4 ------------------------------------------------------------------------

fn cd1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(SEED);
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let nv = r.random_range(1..8);
        let nh = r.random_range(1..8);
        let b = r.random_range(1..6);
        let mut rbm = rbm_init(nv, nh, t).unwrap();
        rbm.visible_bias
            .iter_mut()
            .for_each(|x| *x = r.random_range(-0.5..0.5));
        rbm.hidden_bias
            .iter_mut()
            .for_each(|x| *x = r.random_range(-0.5..0.5));
        let batch: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..nv).map(|_| r.random::<f64>()).collect())
            .collect();
        let uniforms: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..nh).map(|_| r.random::<f64>()).collect())
            .collect();
        let rate = r.random_range(0.01..1.0);
        let want = oracle_cd1(&rbm, &batch, rate, &uniforms);
        let u = Array2::from_shape_fn((b, nh), |(i, j)| uniforms[i][j]);
        rbm_cd1_update_with_uniforms(&mut rbm, to_matrix(&batch).unwrap().view(), rate, u.view())
            .unwrap();
        let diffs = rbm
            .weights
            .iter()
            .zip(want.weights.iter())
            .chain(rbm.visible_bias.iter().zip(want.visible_bias.iter()))
            .chain(rbm.hidden_bias.iter().zip(want.hidden_bias.iter()))
            .map(|(a, b)| (a - b).abs());
        worst = diffs.fold(worst, f64::max);
    }

    let data = to_matrix(&eight_patterns(10)).unwrap();
    let improved = (0..10u64)
        .filter(|&seed| {
            let after = |epochs| {
                let mut rbm = rbm_init(3, 2, seed).unwrap();
                let mut s = stream_rng(seed, Stream::Sampling, 0);
                let mut o = stream_rng(seed, Stream::Shuffle, 0);
                rbm_train(&mut rbm, data.view(), epochs, 0.1, 10, &mut s, &mut o).unwrap();
                rbm.reconstruction_cross_entropy(data.view())
            };
            after(25) < after(1)
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && improved == 10 && elapsed < Duration::from_secs(60),
        format!("replay max diff {worst:.1e} over 100 RBMs, 25 < 1 epoch on {improved}/10 seeds, {elapsed:.2?}"),
    )
}

// 5 ------------------------------------------------------------------------

fn condensation(corpus: &[FeatureRow]) -> Outcome {
    let mut r = rng(SEED);
    let mut consistent = 0;
    for t in 0..100u64 {
        let n = r.random_range(10..80);
        let dim = r.random_range(1..5);
        let data = random_dataset(&mut r, n, dim);
        let store = data.select(&cnn_condense_indices(&data, t));
        let knn = KnnModel::new(store, 1).unwrap();
        if data
            .vectors()
            .iter()
            .zip(data.labels())
            .all(|(x, &l)| knn.classify(x).unwrap() == l)
        {
            consistent += 1;
        }
    }

    let raw: Vec<Vec<f64>> = corpus.iter().map(|r| r.features.clone()).collect();
    let scaled = MinMaxScaler::fit(&raw).unwrap().apply_all(&raw).unwrap();
    let data = Dataset::new(scaled, corpus.iter().map(|r| r.label).collect()).unwrap();
    let kept = cnn_condense_indices(&data, SEED).len();
    let reduction = 1.0 - kept as f64 / data.len() as f64;
    outcome(
        consistent == 100 && reduction >= 0.60,
        format!(
            "1-NN consistent on {consistent}/100 datasets; synthetic corpus {} → {kept} ({:.1}% reduction)",
            data.len(),
            100.0 * reduction
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn mean_f1(results: &[PatientResult]) -> f64 {
    results.iter().map(|r| r.metrics.f1).sum::<f64>() / results.len() as f64
}

fn f1_list(results: &[PatientResult]) -> String {
    results
        .iter()
        .map(|r| format!("{:.3}", r.metrics.f1))
        .collect::<Vec<_>>()
        .join("/")
}

fn end_to_end(corpus: &[FeatureRow], featurize_time: Duration) -> (Outcome, Vec<String>) {
    let start = Instant::now();
    let study = |classifier, protocol, mode| {
        let mut cfg = RunConfig {
            classifier,
            protocol,
            seed: SEED,
            ..RunConfig::default()
        };
        cfg.finetune.mode = mode;
        commands::run_protocol(&cfg, corpus.to_vec()).unwrap()
    };
    let full = FinetuneMode::Full;
    let single_dbn = study(ClassifierChoice::Dbn, Protocol::SinglePatient, full);
    let single_lr = study(ClassifierChoice::Lr, Protocol::SinglePatient, full);
    let single_knn = study(ClassifierChoice::Knn, Protocol::SinglePatient, full);
    let loo_dbn = study(ClassifierChoice::Dbn, Protocol::LeaveOneOut, full);
    let loo_lr = study(ClassifierChoice::Lr, Protocol::LeaveOneOut, full);
    let elapsed = start.elapsed() + featurize_time;

    let dbn_wins = loo_dbn
        .iter()
        .zip(&loo_lr)
        .filter(|(d, l)| d.metrics.f1 >= l.metrics.f1)
        .count();
    let pass = mean_f1(&single_dbn) >= 0.90
        && mean_f1(&single_lr) >= 0.90
        && mean_f1(&single_knn) >= 0.90
        && mean_f1(&loo_dbn) >= 0.75
        && dbn_wins >= 3
        && elapsed < Duration::from_secs(15 * 60);
    let detail = format!(
        "single F1 DBN {:.3} LR {:.3} KNN5 {:.3}; LOO F1 DBN {:.3}, DBN ≥ LR on {dbn_wins}/5; {elapsed:.1?}",
        mean_f1(&single_dbn),
        mean_f1(&single_lr),
        mean_f1(&single_knn),
        mean_f1(&loo_dbn),
    );

    let top_single = study(
        ClassifierChoice::Dbn,
        Protocol::SinglePatient,
        FinetuneMode::Top,
    );
    let top_loo = study(
        ClassifierChoice::Dbn,
        Protocol::LeaveOneOut,
        FinetuneMode::Top,
    );
    let info = vec![
        format!(
            "single-patient F1 per patient: DBN {} | LR {} | KNN {}",
            f1_list(&single_dbn),
            f1_list(&single_lr),
            f1_list(&single_knn)
        ),
        format!(
            "leave-one-out F1 per patient: DBN {} | LR {}",
            f1_list(&loo_dbn),
            f1_list(&loo_lr)
        ),
        format!(
            "finetune mode `top`: single F1 {:.3} ({}), LOO F1 {:.3} ({})",
            mean_f1(&top_single),
            f1_list(&top_single),
            mean_f1(&top_loo),
            f1_list(&top_loo)
        ),
    ];
    (outcome(pass, detail), info)
}

// 7 ------------------------------------------------------------------------

fn determinism(features_csv: &std::path::Path, dir: &std::path::Path) -> Outcome {
    let mut identical = true;
    let mut same_predictions = true;
    let mut r = rng(SEED);
    let probes: Vec<Vec<f64>> = (0..1000)
        .map(|_| (0..207).map(|_| r.random_range(-3.0..30.0)).collect())
        .collect();
    for classifier in ["dbn", "lr", "svm", "cnn", "knn"] {
        let mut paths = Vec::new();
        for run in 0..2 {
            let path = dir.join(format!("{classifier}{run}.szdt"));
            let mut cfg = RunConfig::default();
            cfg.set("features", features_csv.to_str().unwrap()).unwrap();
            cfg.set("classifier", classifier).unwrap();
            cfg.set("patient", "synth02").unwrap();
            cfg.set("seed", "7").unwrap();
            cfg.set("output", path.to_str().unwrap()).unwrap();
            commands::cmd_train(&cfg).unwrap();
            paths.push(path);
        }
        identical &= fs::read(&paths[0]).unwrap() == fs::read(&paths[1]).unwrap();

        let mut cfg = RunConfig::default();
        cfg.set("classifier", classifier).unwrap();
        cfg.set("patient", "synth02").unwrap();
        cfg.set("seed", "7").unwrap();
        let rows = commands::read_feature_csv(features_csv).unwrap();
        let in_memory = commands::train(&cfg, rows).unwrap().file;
        let loaded = ModelFile::load(&paths[0]).unwrap();
        same_predictions &= loaded == in_memory
            && probes
                .iter()
                .all(|x| loaded.classify(x).unwrap() == in_memory.classify(x).unwrap());
    }
    outcome(
        identical && same_predictions,
        format!(
            "retrained files byte-identical: {identical}; reload predictions identical on 1000 vectors: {same_predictions} (dbn, lr, svm, cnn, knn)"
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn baseline(corpus: &[FeatureRow]) -> Outcome {
    let mut r = rng(SEED);
    let mut sets: Vec<Vec<u8>> = (0..1000)
        .map(|_| {
            let n = r.random_range(1..300);
            let share = r.random_range(0.0..=0.15);
            (0..n)
                .map(|_| u8::from(r.random::<f64>() < share))
                .collect()
        })
        .collect();
    sets.push(corpus.iter().map(|w| w.label).collect());
    let mut checked = 0;
    let mut ok = true;
    for labels in sets {
        let negatives = labels.iter().filter(|&&l| l == 0).count();
        if (negatives as f64) < 0.85 * labels.len() as f64 {
            continue;
        }
        let m = majority_baseline(&labels).unwrap();
        ok &= m.accuracy >= 0.85 && m.f1 == 0.0;
        checked += 1;
    }
    outcome(
        ok,
        format!("{checked} label sets with ≥85% negatives: accuracy ≥ 0.85 and F1 = 0"),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let edfs = synthgen(
        &SynthConfig {
            seed: SEED,
            ..SynthConfig::default()
        },
        dir.path(),
    )
    .unwrap();
    let cfg = RunConfig {
        inputs: edfs,
        labels: Some(dir.path().join("labels.csv")),
        ..RunConfig::default()
    };
    let corpus = commands::featurize_inputs(&cfg).unwrap();
    let featurize_time = start.elapsed();
    let features_csv = dir.path().join("features.csv");
    fs::write(&features_csv, commands::feature_csv(&corpus)).unwrap();
    let positives = corpus.iter().filter(|r| r.label == 1).count();
    println!(
        "corpus: {} windows from 5 synthetic patients, {:.1}% seizure",
        corpus.len(),
        100.0 * positives as f64 / corpus.len() as f64
    );

    let (e2e, info) = end_to_end(&corpus, featurize_time);
    let results = [
        ("1 cost model ratios", cost_model()),
        ("2 feature oracle", feature_oracle()),
        ("3 gradient checks", gradients()),
        ("4 CD-1 replay and reconstruction", cd1()),
        ("5 condensation", condensation(&corpus)),
        ("6 end-to-end synthetic study", e2e),
        ("7 determinism", determinism(&features_csv, dir.path())),
        ("8 majority baseline", baseline(&corpus)),
    ];
    for line in info {
        println!("      {line}");
    }
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
