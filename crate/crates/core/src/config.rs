//! Run configuration: a flat `key = value` file, overridden by CLI flags.
//!
//! ```text
//! # comments start with '#'
//! inputs = data/synth01.edf, data/synth02.edf
//! labels = data/labels.csv
//! classifier = dbn
//! layers = 207, 500, 500
//! protocol = loo
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifiers::LrConfig;
use crate::dbn::{FinetuneConfig, FinetuneMode, PretrainConfig, DEFAULT_LAYER_SIZES};
use crate::error::{Error, Result};
use crate::evaluation::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierChoice {
    Knn,
    Cnn,
    Svm,
    Lr,
    Dbn,
}

impl ClassifierChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassifierChoice::Knn => "knn",
            ClassifierChoice::Cnn => "cnn",
            ClassifierChoice::Svm => "svm",
            ClassifierChoice::Lr => "lr",
            ClassifierChoice::Dbn => "dbn",
        }
    }
}

impl FromStr for ClassifierChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "knn" => ClassifierChoice::Knn,
            "cnn" => ClassifierChoice::Cnn,
            "svm" => ClassifierChoice::Svm,
            "lr" => ClassifierChoice::Lr,
            "dbn" => ClassifierChoice::Dbn,
            _ => {
                return Err(Error::Config(format!(
                    "unknown classifier {s:?} (expected knn, cnn, svm, lr or dbn)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Rbf,
    Polynomial,
    Sigmoid,
}

impl FromStr for KernelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rbf" => KernelChoice::Rbf,
            "polynomial" | "poly" => KernelChoice::Polynomial,
            "sigmoid" => KernelChoice::Sigmoid,
            _ => {
                return Err(Error::Config(format!(
                    "unknown kernel {s:?} (expected rbf, polynomial or sigmoid)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSettings {
    pub kernel: KernelChoice,
    /// `None` means `1 / dim`.
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub c_reg: f64,
    pub tol: f64,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            kernel: KernelChoice::Rbf,
            gamma: None,
            degree: 3,
            coef0: 0.0,
            c_reg: 1.0,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Recordings (`.edf` or `.csv`).
    pub inputs: Vec<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Precomputed feature CSV; used instead of `inputs` when set.
    pub features: Option<PathBuf>,
    /// Sample rate for CSV recordings.
    pub sample_rate: Option<u32>,
    pub output: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub model: Option<PathBuf>,

    pub classifier: ClassifierChoice,
    pub k: usize,
    /// Neighbours used over the condensed store.
    pub cnn_k: usize,
    pub svm: SvmSettings,
    pub lr: LrConfig,
    pub layers: Vec<usize>,
    pub pretrain: PretrainConfig,
    pub finetune: FinetuneConfig,

    pub protocol: Protocol,
    pub patient: Option<String>,
    pub contiguous: bool,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            labels: None,
            features: None,
            sample_rate: None,
            output: None,
            predictions: None,
            model: None,
            classifier: ClassifierChoice::Dbn,
            k: 5,
            cnn_k: 1,
            svm: SvmSettings::default(),
            lr: LrConfig::default(),
            layers: DEFAULT_LAYER_SIZES.to_vec(),
            pretrain: PretrainConfig::default(),
            finetune: FinetuneConfig::default(),
            protocol: Protocol::SinglePatient,
            patient: None,
            contiguous: false,
            seed: 0,
            jobs: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::Config(format!("{key} must be positive")));
    }
    Ok(v)
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key.trim() {
            "inputs" => self.inputs = parse_list(key, value)?,
            "labels" => self.labels = path(),
            "features" => self.features = path(),
            "sample_rate" => self.sample_rate = Some(parse(key, value)?),
            "output" => self.output = path(),
            "predictions" => self.predictions = path(),
            "model" => self.model = path(),
            "classifier" => self.classifier = value.parse()?,
            "k" => self.k = positive(key, parse(key, value)?)?,
            "cnn_k" => self.cnn_k = positive(key, parse(key, value)?)?,
            "kernel" => self.svm.kernel = value.parse()?,
            "gamma" => self.svm.gamma = Some(parse(key, value)?),
            "degree" => self.svm.degree = parse(key, value)?,
            "coef0" => self.svm.coef0 = parse(key, value)?,
            "c_reg" => self.svm.c_reg = parse(key, value)?,
            "svm_tol" => self.svm.tol = parse(key, value)?,
            "lr_rate" => self.lr.rate = parse(key, value)?,
            "lr_iters" => self.lr.iters = parse(key, value)?,
            "layers" => {
                let layers: Vec<usize> = parse_list(key, value)?;
                if layers.len() < 2 || layers.contains(&0) {
                    return Err(Error::Config(
                        "layers needs an input size and at least one positive hidden size".into(),
                    ));
                }
                self.layers = layers;
            }
            "pretrain_epochs" => self.pretrain.epochs = parse(key, value)?,
            "pretrain_rate" => self.pretrain.rate = parse(key, value)?,
            "pretrain_batch" => self.pretrain.batch_size = positive(key, parse(key, value)?)?,
            "finetune_epochs" => self.finetune.epochs = parse(key, value)?,
            "finetune_rate" => self.finetune.rate = parse(key, value)?,
            "finetune_batch" => self.finetune.batch_size = positive(key, parse(key, value)?)?,
            "finetune_mode" => self.finetune.mode = value.parse::<FinetuneMode>()?,
            "protocol" => self.protocol = value.parse()?,
            "patient" => self.patient = Some(value.to_string()),
            "contiguous" => self.contiguous = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "jobs" => self.jobs = positive(key, parse(key, value)?)?,
            other => return Err(Error::Config(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Apply every setting of a config file's text. `origin` names it in errors.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{origin}:{}: expected `key = value`", i + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }
}
