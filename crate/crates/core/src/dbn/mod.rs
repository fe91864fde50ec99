//! Deep belief networks: greedily pretrained RBM stacks topped by a softmax
//! (two-class logistic) output layer.
//!
//! Classification is a deterministic forward pass through the hidden
//! probabilities of each layer; visible biases only matter for pretraining.

mod rbm;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;

pub use rbm::{init_bound, rbm_cd1_update, rbm_cd1_update_with_uniforms, rbm_init, rbm_train, Rbm};

use crate::classifiers::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::compute_metrics;
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::FeatureVector;

/// Layer widths used for the 23-channel montage: 207 inputs, two hidden
/// layers of 500.
pub const DEFAULT_LAYER_SIZES: [usize; 3] = [207, 500, 500];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub rate: f64,
    pub batch_size: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 25,
            rate: 0.001,
            batch_size: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinetuneMode {
    /// Backpropagate through the output layer and every RBM.
    Full,
    /// Train only the output layer.
    Top,
}

impl FinetuneMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FinetuneMode::Full => "full",
            FinetuneMode::Top => "top",
        }
    }
}

impl std::str::FromStr for FinetuneMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FinetuneMode::Full),
            "top" => Ok(FinetuneMode::Top),
            _ => Err(Error::InvalidParameter(format!(
                "finetune mode must be `full` or `top`, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinetuneConfig {
    pub epochs: usize,
    pub rate: f64,
    pub batch_size: usize,
    pub mode: FinetuneMode,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            epochs: 16,
            rate: 0.1,
            batch_size: 10,
            mode: FinetuneMode::Full,
        }
    }
}

/// Hyperparameters a model was trained with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbnProvenance {
    pub pretrain: PretrainConfig,
    pub finetune: FinetuneConfig,
    pub seed: u64,
}

impl Default for DbnProvenance {
    fn default() -> Self {
        DbnProvenance {
            pretrain: PretrainConfig {
                epochs: 0,
                ..Default::default()
            },
            finetune: FinetuneConfig {
                epochs: 0,
                ..Default::default()
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbnModel {
    pub layers: Vec<Rbm>,
    /// `last hidden × 2`
    pub output_weights: Array2<f64>,
    pub output_bias: Array1<f64>,
    pub provenance: DbnProvenance,
}

pub fn to_matrix(vectors: &[FeatureVector]) -> Result<Array2<f64>> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut m = Array2::zeros((vectors.len(), dim));
    for (mut row, v) in m.rows_mut().into_iter().zip(vectors) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        row.assign(&ndarray::ArrayView1::from(v.as_slice()));
    }
    Ok(m)
}

/// Greedy layer-wise pretraining. Labels are never seen: each RBM is trained
/// on the hidden probabilities of the one below.
pub fn dbn_pretrain(
    layer_sizes: &[usize],
    data: ArrayView2<f64>,
    config: &PretrainConfig,
    seed: u64,
) -> Result<Vec<Rbm>> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidParameter(
            "a DBN needs an input size and at least one hidden layer".into(),
        ));
    }
    if data.ncols() != layer_sizes[0] {
        return Err(Error::DimensionMismatch {
            expected: layer_sizes[0],
            found: data.ncols(),
        });
    }
    if data.nrows() == 0 {
        return Err(Error::EmptyInput("no pretraining data"));
    }
    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    let mut input = data.to_owned();
    for (l, pair) in layer_sizes.windows(2).enumerate() {
        let l = l as u64;
        let mut rbm = rbm_init(pair[0], pair[1], derive_seed(seed, Stream::Init, l))?;
        rbm_train(
            &mut rbm,
            input.view(),
            config.epochs,
            config.rate,
            config.batch_size,
            &mut stream_rng(seed, Stream::Sampling, l),
            &mut stream_rng(seed, Stream::Shuffle, l),
        )?;
        input = rbm.hidden_probs_batch(input.view());
        layers.push(rbm);
    }
    Ok(layers)
}

/// Parameter gradients, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnGradients {
    pub weights: Vec<Array2<f64>>,
    pub hidden_bias: Vec<Array1<f64>>,
    pub output_weights: Array2<f64>,
    pub output_bias: Array1<f64>,
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    out
}

impl DbnModel {
    /// Stack with a zero-initialized output layer.
    pub fn from_stack(layers: Vec<Rbm>) -> Result<Self> {
        let top = layers
            .last()
            .ok_or_else(|| Error::InvalidParameter("empty RBM stack".into()))?
            .n_hidden();
        for pair in layers.windows(2) {
            if pair[0].n_hidden() != pair[1].n_visible() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].n_hidden(),
                    found: pair[1].n_visible(),
                });
            }
        }
        Ok(DbnModel {
            layers,
            output_weights: Array2::zeros((top, 2)),
            output_bias: Array1::zeros(2),
            provenance: DbnProvenance::default(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_visible()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Rbm::n_hidden))
            .collect()
    }

    /// Activations of every layer, input first.
    fn forward(&self, x: ArrayView2<f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let mut acts = vec![x.to_owned()];
        for rbm in &self.layers {
            let next = rbm.hidden_probs_batch(acts.last().unwrap().view());
            acts.push(next);
        }
        let logits = acts.last().unwrap().dot(&self.output_weights) + &self.output_bias;
        (acts, softmax_rows(&logits))
    }

    /// Class probabilities for each row.
    pub fn predict_proba_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        Ok(self.forward(x).1)
    }

    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
        let probs = self.predict_proba_batch(x)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|r| u8::from(r[1] > r[0]))
            .collect())
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        dbn_predict(self, x).map(|(l, _)| l)
    }

    /// Mean negative log-likelihood of `labels` and its gradient.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, labels: &[u8]) -> (f64, DbnGradients) {
        let n = x.nrows() as f64;
        let (acts, probs) = self.forward(x);
        let loss = probs
            .rows()
            .into_iter()
            .zip(labels)
            .map(|(p, &y)| -p[y as usize].max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / n;

        let mut delta = probs;
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y as usize] -= 1.0;
        }
        delta /= n;

        let top = acts.last().unwrap();
        let output_weights = top.t().dot(&delta);
        let output_bias = delta.sum_axis(Axis(0));
        let mut upstream = delta.dot(&self.output_weights.t());

        let depth = self.layers.len();
        let mut weights = vec![Array2::zeros((0, 0)); depth];
        let mut hidden_bias = vec![Array1::zeros(0); depth];
        for l in (0..depth).rev() {
            let out = &acts[l + 1];
            let dz = upstream * &out.mapv(|a| a * (1.0 - a));
            weights[l] = acts[l].t().dot(&dz);
            hidden_bias[l] = dz.sum_axis(Axis(0));
            upstream = dz.dot(&self.layers[l].weights.t());
        }
        (
            loss,
            DbnGradients {
                weights,
                hidden_bias,
                output_weights,
                output_bias,
            },
        )
    }

    fn apply_gradients(&mut self, g: &DbnGradients, rate: f64, mode: FinetuneMode) {
        self.output_weights.scaled_add(-rate, &g.output_weights);
        self.output_bias.scaled_add(-rate, &g.output_bias);
        if mode == FinetuneMode::Full {
            for (l, rbm) in self.layers.iter_mut().enumerate() {
                rbm.weights.scaled_add(-rate, &g.weights[l]);
                rbm.hidden_bias.scaled_add(-rate, &g.hidden_bias[l]);
            }
        }
    }
}

/// Forward pass with softmax output; the label is the argmax, ties to `0`.
pub fn dbn_predict(model: &DbnModel, x: &[f64]) -> Result<(u8, [f64; 2])> {
    let row = ndarray::ArrayView2::from_shape((1, x.len()), x).expect("row shape");
    let p = model.predict_proba_batch(row)?;
    let probs = [p[[0, 0]], p[[0, 1]]];
    Ok((u8::from(probs[1] > probs[0]), probs))
}

/// Supervised training of the stack plus output layer by mini-batch
/// gradient descent on cross-entropy.
///
/// With a validation set, the model with the best validation F1 over the
/// epochs is returned (earliest wins ties); otherwise the final one.
pub fn dbn_finetune(
    stack: Vec<Rbm>,
    train: &Dataset,
    validation: Option<&Dataset>,
    config: &FinetuneConfig,
    seed: u64,
) -> Result<DbnModel> {
    let mut model = DbnModel::from_stack(stack)?;
    if train.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: train.dim(),
        });
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter(
            "batch size must be positive".into(),
        ));
    }
    let x = to_matrix(train.vectors())?;
    let val_x = validation.map(|v| to_matrix(v.vectors())).transpose()?;

    let mut shuffle = stream_rng(seed, Stream::Finetune, 0);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, DbnModel)> = None;
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle);
        for chunk in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let yb: Vec<u8> = chunk.iter().map(|&i| train.labels()[i]).collect();
            let (_, g) = model.loss_and_gradients(xb.view(), &yb);
            model.apply_gradients(&g, config.rate, config.mode);
        }
        if let (Some(val), Some(vx)) = (validation, &val_x) {
            let preds = model.predict_batch(vx.view())?;
            let f1 = compute_metrics(&preds, val.labels())?.f1;
            if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
                best = Some((f1, model.clone()));
            }
        }
    }
    let mut model = best.map_or(model, |(_, m)| m);
    model.provenance.finetune = *config;
    model.provenance.seed = seed;
    Ok(model)
}

/// Pretrain then finetune with one seed.
pub fn dbn_train(
    layer_sizes: &[usize],
    train: &Dataset,
    validation: Option<&Dataset>,
    pretrain: &PretrainConfig,
    finetune: &FinetuneConfig,
    seed: u64,
) -> Result<DbnModel> {
    let x = to_matrix(train.vectors())?;
    let stack = dbn_pretrain(layer_sizes, x.view(), pretrain, seed)?;
    let mut model = dbn_finetune(stack, train, validation, finetune, seed)?;
    model.provenance.pretrain = *pretrain;
    Ok(model)
}
