//! `SZDT` model files.
//!
//! ```text
//! "SZDT"            magic
//! u16               format version (1)
//! u8                classifier tag: 1 KNN, 2 CNN, 3 SVM, 4 LR, 5 DBN
//! u64               input dimension
//! u8 [+ 2·dim f64]  scaler present flag, then mins and maxes
//! u8 u8 u64 u32 ..  run: protocol (0 none, 1 single, 2 loo), contiguous
//!                   flag, split seed, patient id length and UTF-8 bytes
//! ...               classifier body (see the writers below)
//! ```
//!
//! Integers and floats are little-endian; every parameter is an `f64`;
//! matrices are row-major.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use crate::classifiers::{Dataset, Kernel, KnnModel, LrModel, SvmModel};
use crate::dbn::{DbnModel, DbnProvenance, FinetuneConfig, PretrainConfig, Rbm};
use crate::error::{Error, Result};
use crate::evaluation::Protocol;
use crate::preprocessing::MinMaxScaler;

pub const MAGIC: &[u8; 4] = b"SZDT";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    /// KNN over a condensed store.
    Cnn(KnnModel),
    Svm(SvmModel),
    Lr(LrModel),
    Dbn(DbnModel),
}

impl TrainedModel {
    pub fn tag(&self) -> u8 {
        match self {
            TrainedModel::Knn(_) => 1,
            TrainedModel::Cnn(_) => 2,
            TrainedModel::Svm(_) => 3,
            TrainedModel::Lr(_) => 4,
            TrainedModel::Dbn(_) => 5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TrainedModel::Knn(_) => "knn",
            TrainedModel::Cnn(_) => "cnn",
            TrainedModel::Svm(_) => "svm",
            TrainedModel::Lr(_) => "lr",
            TrainedModel::Dbn(_) => "dbn",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TrainedModel::Knn(m) | TrainedModel::Cnn(m) => m.train.dim(),
            TrainedModel::Svm(m) => m.dim(),
            TrainedModel::Lr(m) => m.weights.len(),
            TrainedModel::Dbn(m) => m.input_dim(),
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        match self {
            TrainedModel::Knn(m) | TrainedModel::Cnn(m) => m.classify(x),
            TrainedModel::Svm(m) => m.classify(x),
            TrainedModel::Lr(m) => crate::classifiers::lr_classify(m, x).map(|(l, _)| l),
            TrainedModel::Dbn(m) => m.classify(x),
        }
    }
}

/// How the training partition was drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub protocol: Protocol,
    pub contiguous: bool,
    pub seed: u64,
    /// Patient split (single) or held out (leave-one-out).
    pub patient: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub scaler: Option<MinMaxScaler>,
    pub run: Option<RunInfo>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Container(msg.into())
}

fn put_f64s(out: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        out.write_f64::<LE>(v).unwrap();
    }
}

fn put_len(out: &mut Vec<u8>, n: usize) {
    out.write_u64::<LE>(n as u64).unwrap();
}

impl ModelFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let dim = self.model.input_dim();
        out.extend_from_slice(MAGIC);
        out.write_u16::<LE>(VERSION).unwrap();
        out.write_u8(self.model.tag()).unwrap();
        put_len(&mut out, dim);

        match &self.scaler {
            Some(s) => {
                out.write_u8(1).unwrap();
                put_f64s(&mut out, s.mins.iter().copied());
                put_f64s(&mut out, s.maxs.iter().copied());
            }
            None => out.write_u8(0).unwrap(),
        }

        match &self.run {
            Some(run) => {
                out.write_u8(match run.protocol {
                    Protocol::SinglePatient => 1,
                    Protocol::LeaveOneOut => 2,
                })
                .unwrap();
                out.write_u8(u8::from(run.contiguous)).unwrap();
                out.write_u64::<LE>(run.seed).unwrap();
                out.write_u32::<LE>(run.patient.len() as u32).unwrap();
                out.extend_from_slice(run.patient.as_bytes());
            }
            None => {
                out.extend_from_slice(&[0, 0]);
                out.write_u64::<LE>(0).unwrap();
                out.write_u32::<LE>(0).unwrap();
            }
        }

        match &self.model {
            TrainedModel::Knn(m) | TrainedModel::Cnn(m) => write_knn(&mut out, m),
            TrainedModel::Svm(m) => write_svm(&mut out, m),
            TrainedModel::Lr(m) => {
                out.write_f64::<LE>(m.rate).unwrap();
                put_len(&mut out, m.iters);
                put_f64s(&mut out, m.weights.iter().copied());
                out.write_f64::<LE>(m.bias).unwrap();
            }
            TrainedModel::Dbn(m) => write_dbn(&mut out, m),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| bad("file too short"))?;
        if &magic != MAGIC {
            return Err(bad("missing SZDT magic"));
        }
        let io = |_| bad("unexpected end of file");
        let version = r.read_u16::<LE>().map_err(io)?;
        if version != VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let tag = r.read_u8().map_err(io)?;
        let dim = read_len(&mut r, bytes.len())?;

        let scaler = match r.read_u8().map_err(io)? {
            0 => None,
            1 => {
                let mins = read_f64s(&mut r, dim)?;
                let maxs = read_f64s(&mut r, dim)?;
                Some(MinMaxScaler { mins, maxs })
            }
            f => return Err(bad(format!("invalid scaler flag {f}"))),
        };

        let protocol = r.read_u8().map_err(io)?;
        let contiguous = r.read_u8().map_err(io)? == 1;
        let seed = r.read_u64::<LE>().map_err(io)?;
        let plen = r.read_u32::<LE>().map_err(io)? as usize;
        let mut patient = vec![0u8; plen.min(bytes.len())];
        r.read_exact(&mut patient).map_err(io)?;
        let patient = String::from_utf8(patient).map_err(|_| bad("patient id is not UTF-8"))?;
        let run = match protocol {
            0 => None,
            1 | 2 => Some(RunInfo {
                protocol: if protocol == 1 {
                    Protocol::SinglePatient
                } else {
                    Protocol::LeaveOneOut
                },
                contiguous,
                seed,
                patient,
            }),
            p => return Err(bad(format!("invalid protocol tag {p}"))),
        };

        let model = match tag {
            1 => TrainedModel::Knn(read_knn(&mut r, dim, bytes.len())?),
            2 => TrainedModel::Cnn(read_knn(&mut r, dim, bytes.len())?),
            3 => TrainedModel::Svm(read_svm(&mut r, dim, bytes.len())?),
            4 => {
                let rate = r.read_f64::<LE>().map_err(io)?;
                let iters = read_len(&mut r, usize::MAX)?;
                let weights = read_f64s(&mut r, dim)?;
                let bias = r.read_f64::<LE>().map_err(io)?;
                TrainedModel::Lr(LrModel {
                    weights,
                    bias,
                    rate,
                    iters,
                })
            }
            5 => TrainedModel::Dbn(read_dbn(&mut r, dim, bytes.len())?),
            t => return Err(bad(format!("unknown classifier tag {t}"))),
        };
        if r.position() as usize != bytes.len() {
            return Err(bad("trailing bytes after model body"));
        }
        Ok(ModelFile { model, scaler, run })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Scale (when a scaler is stored) and classify a raw feature vector.
    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        match &self.scaler {
            Some(s) => self.model.classify(&s.apply(x)?),
            None => self.model.classify(x),
        }
    }
}

fn read_len(r: &mut Cursor<&[u8]>, limit: usize) -> Result<usize> {
    let n = r
        .read_u64::<LE>()
        .map_err(|_| bad("unexpected end of file"))?;
    if n as u128 > limit as u128 {
        return Err(bad(format!("length {n} exceeds the file size")));
    }
    Ok(n as usize)
}

fn read_f64s(r: &mut Cursor<&[u8]>, n: usize) -> Result<Vec<f64>> {
    let remaining = r.get_ref().len() - r.position() as usize;
    if n.saturating_mul(8) > remaining {
        return Err(bad("unexpected end of file"));
    }
    let mut out = vec![0.0; n];
    r.read_f64_into::<LE>(&mut out)
        .map_err(|_| bad("unexpected end of file"))?;
    Ok(out)
}

fn read_matrix(r: &mut Cursor<&[u8]>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let data = read_f64s(r, rows.saturating_mul(cols))?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches length"))
}

fn write_knn(out: &mut Vec<u8>, m: &KnnModel) {
    put_len(out, m.k);
    put_len(out, m.train.len());
    for (v, &l) in m.train.vectors().iter().zip(m.train.labels()) {
        out.write_u8(l).unwrap();
        put_f64s(out, v.iter().copied());
    }
}

fn read_knn(r: &mut Cursor<&[u8]>, dim: usize, limit: usize) -> Result<KnnModel> {
    let k = read_len(r, limit)?;
    let n = read_len(r, limit)?;
    let mut vectors = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.read_u8().map_err(|_| bad("unexpected end of file"))?);
        vectors.push(read_f64s(r, dim)?);
    }
    let train = Dataset::new(vectors, labels).map_err(|e| bad(e.to_string()))?;
    KnnModel::new(train, k).map_err(|e| bad(e.to_string()))
}

fn write_svm(out: &mut Vec<u8>, m: &SvmModel) {
    let (tag, gamma, degree, coef0) = match m.kernel {
        Kernel::Rbf { gamma } => (1u8, gamma, 0u32, 0.0),
        Kernel::Polynomial {
            gamma,
            degree,
            coef0,
        } => (2, gamma, degree, coef0),
        Kernel::Sigmoid { gamma, coef0 } => (3, gamma, 0, coef0),
    };
    out.write_u8(tag).unwrap();
    out.write_f64::<LE>(gamma).unwrap();
    out.write_u32::<LE>(degree).unwrap();
    put_f64s(out, [coef0, m.c_reg, m.tol, m.bias]);
    put_len(out, m.support_vectors.len());
    for (sv, &c) in m.support_vectors.iter().zip(&m.dual_coef) {
        out.write_f64::<LE>(c).unwrap();
        put_f64s(out, sv.iter().copied());
    }
}

fn read_svm(r: &mut Cursor<&[u8]>, dim: usize, limit: usize) -> Result<SvmModel> {
    let io = |_| bad("unexpected end of file");
    let tag = r.read_u8().map_err(io)?;
    let gamma = r.read_f64::<LE>().map_err(io)?;
    let degree = r.read_u32::<LE>().map_err(io)?;
    let p = read_f64s(r, 4)?;
    let kernel = match tag {
        1 => Kernel::Rbf { gamma },
        2 => Kernel::Polynomial {
            gamma,
            degree,
            coef0: p[0],
        },
        3 => Kernel::Sigmoid { gamma, coef0: p[0] },
        t => return Err(bad(format!("unknown kernel tag {t}"))),
    };
    let n = read_len(r, limit)?;
    let mut support_vectors = Vec::with_capacity(n);
    let mut dual_coef = Vec::with_capacity(n);
    for _ in 0..n {
        dual_coef.push(r.read_f64::<LE>().map_err(io)?);
        support_vectors.push(read_f64s(r, dim)?);
    }
    Ok(SvmModel {
        kernel,
        c_reg: p[1],
        tol: p[2],
        support_vectors,
        dual_coef,
        bias: p[3],
    })
}

fn write_dbn(out: &mut Vec<u8>, m: &DbnModel) {
    let sizes = m.layer_sizes();
    put_len(out, m.layers.len());
    sizes.iter().for_each(|&s| put_len(out, s));
    for rbm in &m.layers {
        put_f64s(out, rbm.weights.iter().copied());
        put_f64s(out, rbm.visible_bias.iter().copied());
        put_f64s(out, rbm.hidden_bias.iter().copied());
    }
    put_f64s(out, m.output_weights.iter().copied());
    put_f64s(out, m.output_bias.iter().copied());
    let p = &m.provenance;
    put_len(out, p.pretrain.epochs);
    out.write_f64::<LE>(p.pretrain.rate).unwrap();
    put_len(out, p.pretrain.batch_size);
    put_len(out, p.finetune.epochs);
    out.write_f64::<LE>(p.finetune.rate).unwrap();
    put_len(out, p.finetune.batch_size);
    out.write_u8(match p.finetune.mode {
        crate::dbn::FinetuneMode::Full => 0,
        crate::dbn::FinetuneMode::Top => 1,
    })
    .unwrap();
    out.write_u64::<LE>(p.seed).unwrap();
}

fn read_dbn(r: &mut Cursor<&[u8]>, dim: usize, limit: usize) -> Result<DbnModel> {
    let depth = read_len(r, limit)?;
    if depth == 0 {
        return Err(bad("DBN without layers"));
    }
    let sizes = (0..=depth)
        .map(|_| read_len(r, limit))
        .collect::<Result<Vec<_>>>()?;
    if sizes[0] != dim {
        return Err(bad(format!(
            "DBN input size {} disagrees with dimension header {dim}",
            sizes[0]
        )));
    }
    let mut layers = Vec::with_capacity(depth);
    for pair in sizes.windows(2) {
        let weights = read_matrix(r, pair[0], pair[1])?;
        let visible_bias = Array1::from(read_f64s(r, pair[0])?);
        let hidden_bias = Array1::from(read_f64s(r, pair[1])?);
        layers.push(Rbm {
            weights,
            visible_bias,
            hidden_bias,
        });
    }
    let output_weights = read_matrix(r, sizes[depth], 2)?;
    let output_bias = Array1::from(read_f64s(r, 2)?);
    let io = |_| bad("unexpected end of file");
    let pretrain = PretrainConfig {
        epochs: read_len(r, usize::MAX)?,
        rate: r.read_f64::<LE>().map_err(io)?,
        batch_size: read_len(r, usize::MAX)?,
    };
    let ft_epochs = read_len(r, usize::MAX)?;
    let ft_rate = r.read_f64::<LE>().map_err(io)?;
    let ft_batch = read_len(r, usize::MAX)?;
    let mode = match r.read_u8().map_err(io)? {
        0 => crate::dbn::FinetuneMode::Full,
        1 => crate::dbn::FinetuneMode::Top,
        m => return Err(bad(format!("unknown finetune mode {m}"))),
    };
    let seed = r.read_u64::<LE>().map_err(io)?;
    Ok(DbnModel {
        layers,
        output_weights,
        output_bias,
        provenance: DbnProvenance {
            pretrain,
            finetune: FinetuneConfig {
                epochs: ft_epochs,
                rate: ft_rate,
                batch_size: ft_batch,
                mode,
            },
            seed,
        },
    })
}
