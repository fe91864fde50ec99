//! Memory and per-window computation estimates for running each classifier
//! on an embedded sensor, with ratios against logistic regression.
//!
//! All quantities are evaluated in `f64`; with the default parameters every
//! intermediate is an exactly representable integer.

use std::fmt::Write as _;

use crate::dbn::DbnModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Window size in samples.
    pub w: f64,
    /// Number of training windows.
    pub t: f64,
    /// Channels.
    pub c: f64,
    /// Features per channel.
    pub m: f64,
    /// Bit resolution of stored values.
    pub r: f64,
    /// Neighbours for KNN.
    pub n: f64,
    /// DBN hidden layers.
    pub l: f64,
    /// Fraction of samples that are peaks.
    pub alpha_k: f64,
    /// Fraction of training windows kept by condensation.
    pub alpha_cnn: f64,
    /// Fraction of training windows that are support vectors.
    pub alpha_svm: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            w: 256.0,
            t: 10_000.0,
            c: 23.0,
            m: 9.0,
            r: 32.0,
            n: 5.0,
            l: 2.0,
            alpha_k: 0.125,
            alpha_cnn: 0.25,
            alpha_svm: 0.05,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("w", self.w),
            ("t", self.t),
            ("c", self.c),
            ("m", self.m),
            ("r", self.r),
            ("n", self.n),
            ("l", self.l),
        ];
        for (name, v) in counts {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cost parameter {name} must be positive, got {v}"
                )));
            }
        }
        let ratios = [
            ("alpha_k", self.alpha_k),
            ("alpha_cnn", self.alpha_cnn),
            ("alpha_svm", self.alpha_svm),
        ];
        for (name, v) in ratios {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "cost ratio {name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    fn cm(&self) -> f64 {
        self.c * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    /// Feature extraction alone.
    SimpleFeatures,
    Knn,
    Cnn,
    Svm,
    Lr,
    Dbn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::SimpleFeatures,
        ClassifierKind::Knn,
        ClassifierKind::Cnn,
        ClassifierKind::Svm,
        ClassifierKind::Lr,
        ClassifierKind::Dbn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::SimpleFeatures => "SF",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Cnn => "CNN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Lr => "LR",
            ClassifierKind::Dbn => "DBN",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier kind {s:?}")))
    }
}

/// Operations to compute the nine features of one window:
/// `19W + 16·α_K·W + 10`.
pub fn sf_ops(p: &CostParams) -> f64 {
    19.0 * p.w + 16.0 * p.alpha_k * p.w + 10.0
}

/// Bits of model storage.
pub fn memory_bits(kind: ClassifierKind, p: &CostParams) -> f64 {
    let cm = p.cm();
    let lr = p.r * (cm + 2.0);
    match kind {
        ClassifierKind::SimpleFeatures => 0.0,
        ClassifierKind::Knn => p.t * p.r * (cm + 1.0),
        ClassifierKind::Cnn => p.alpha_cnn * p.t * p.r * (cm + 1.0),
        ClassifierKind::Svm => p.alpha_svm * p.t * p.r * (cm + 2.0),
        ClassifierKind::Lr => lr,
        // One CM×CM layer per hidden layer on top of the output regression.
        ClassifierKind::Dbn => lr + p.l * p.r * cm * cm,
    }
}

/// Operations to classify one window, feature extraction included.
pub fn computation_ops(kind: ClassifierKind, p: &CostParams) -> f64 {
    let cm = p.cm();
    let sf = sf_ops(p);
    let lr = 2.0 * cm + 5.0 + sf;
    match kind {
        ClassifierKind::SimpleFeatures => sf,
        ClassifierKind::Knn => 3.0 * p.t * (cm + p.n) + (p.n + 1.0) + sf,
        ClassifierKind::Cnn => 3.0 * p.alpha_cnn * p.t * (cm + p.n) + (p.n + 1.0) + sf,
        ClassifierKind::Svm => 2.0 * cm + p.alpha_svm * p.t + 5.0 + sf,
        ClassifierKind::Lr => lr,
        ClassifierKind::Dbn => lr + p.l * cm * (2.0 * cm + 1.0),
    }
}

/// Exact storage of a trained network: every weight and hidden bias of the
/// stack plus the output layer, at `bits` per value. Visible biases are not
/// needed for classification and are not counted.
pub fn actual_dbn_memory_bits(model: &DbnModel, bits: f64) -> f64 {
    let stack: usize = model
        .layers
        .iter()
        .map(|l| l.n_visible() * l.n_hidden() + l.n_hidden())
        .sum();
    let output = model.output_weights.len() + model.output_bias.len();
    bits * (stack + output) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub label: String,
    pub memory_bits: f64,
    pub computation_ops: f64,
    /// `None` for feature extraction, which has no classifier to compare.
    pub memory_ratio: Option<f64>,
    pub computation_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub params: CostParams,
    pub rows: Vec<CostRow>,
}

pub fn relative_report(p: &CostParams) -> Result<CostReport> {
    p.validate()?;
    let lr_mem = memory_bits(ClassifierKind::Lr, p);
    let lr_ops = computation_ops(ClassifierKind::Lr, p);
    let rows = ClassifierKind::ALL
        .iter()
        .map(|&kind| {
            let mem = memory_bits(kind, p);
            let ops = computation_ops(kind, p);
            let sf = kind == ClassifierKind::SimpleFeatures;
            CostRow {
                label: kind.name().to_string(),
                memory_bits: mem,
                computation_ops: ops,
                memory_ratio: (!sf).then(|| mem / lr_mem),
                computation_ratio: (!sf).then(|| ops / lr_ops),
            }
        })
        .collect();
    Ok(CostReport { params: *p, rows })
}

impl CostReport {
    pub fn row(&self, label: &str) -> Option<&CostRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Add a row for a trained network's exact storage. Computation uses
    /// one multiply-add per weight plus a bias and activation per unit.
    pub fn add_actual_dbn(&mut self, model: &DbnModel) {
        let p = &self.params;
        let lr_mem = memory_bits(ClassifierKind::Lr, p);
        let lr_ops = computation_ops(ClassifierKind::Lr, p);
        let mem = actual_dbn_memory_bits(model, p.r);
        let stack_ops: usize = model
            .layers
            .iter()
            .map(|l| l.n_hidden() * (2 * l.n_visible() + 1))
            .sum();
        let ops = lr_ops + stack_ops as f64;
        self.rows.push(CostRow {
            label: format!("DBN (actual {:?})", model.layer_sizes()),
            memory_bits: mem,
            computation_ops: ops,
            memory_ratio: Some(mem / lr_mem),
            computation_ratio: Some(ops / lr_ops),
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:>16} {:>14} {:>12} {:>12}",
            "classifier", "memory_bits", "ops", "mem_vs_LR", "ops_vs_LR"
        );
        let ratio = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |v| format!("{v:.3}x"));
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<28} {:>16} {:>14} {:>12} {:>12}",
                row.label,
                format_quantity(row.memory_bits),
                format_quantity(row.computation_ops),
                ratio(row.memory_ratio),
                ratio(row.computation_ratio)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "classifier,memory_bits,computation_ops,memory_ratio_vs_lr,computation_ratio_vs_lr\n",
        );
        let ratio = |r: Option<f64>| r.map_or_else(String::new, |v| format!("{v}"));
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.label,
                row.memory_bits,
                row.computation_ops,
                ratio(row.memory_ratio),
                ratio(row.computation_ratio)
            );
        }
        out
    }
}

fn format_quantity(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}
