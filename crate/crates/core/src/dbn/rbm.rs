//! Restricted Boltzmann machines trained with one-step contrastive divergence.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::classifiers::sigmoid;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Bipartite layer: `weights` is `visible × hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rbm {
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
}

/// Half-width of the uniform initialization range.
pub fn init_bound(n_visible: usize, n_hidden: usize) -> f64 {
    4.0 * (6.0 / (n_visible + n_hidden) as f64).sqrt()
}

/// Weights uniform in `±4·sqrt(6 / (visible + hidden))`, zero biases.
pub fn rbm_init(n_visible: usize, n_hidden: usize, seed: u64) -> Result<Rbm> {
    if n_visible == 0 || n_hidden == 0 {
        return Err(Error::InvalidParameter(format!(
            "RBM sizes must be positive, got {n_visible}x{n_hidden}"
        )));
    }
    let bound = init_bound(n_visible, n_hidden);
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    let mut rng = rng_from_seed(seed);
    let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || dist.sample(&mut rng));
    Ok(Rbm {
        weights,
        visible_bias: Array1::zeros(n_visible),
        hidden_bias: Array1::zeros(n_hidden),
    })
}

impl Rbm {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Rbm {
        Rbm {
            weights: Array2::zeros((n_visible, n_hidden)),
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
        }
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    fn check_visible(&self, found: usize) -> Result<()> {
        if found == self.n_visible() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n_visible(),
                found,
            })
        }
    }

    /// `sigmoid(Wᵀ v + h)` for a single visible vector.
    pub fn hidden_probs(&self, visible: &[f64]) -> Result<Array1<f64>> {
        self.check_visible(visible.len())?;
        let v = ndarray::ArrayView1::from(visible);
        Ok((v.dot(&self.weights) + &self.hidden_bias).mapv(sigmoid))
    }

    /// Row-wise hidden probabilities of a `batch × visible` matrix.
    pub fn hidden_probs_batch(&self, visible: ArrayView2<f64>) -> Array2<f64> {
        (visible.dot(&self.weights) + &self.hidden_bias).mapv(sigmoid)
    }

    /// Row-wise visible probabilities of a `batch × hidden` matrix.
    pub fn visible_probs_batch(&self, hidden: ArrayView2<f64>) -> Array2<f64> {
        (hidden.dot(&self.weights.t()) + &self.visible_bias).mapv(sigmoid)
    }

    /// Mean binary cross-entropy between data and its mean-field
    /// reconstruction `sigmoid(W · sigmoid(Wᵀv + h) + b)`.
    pub fn reconstruction_cross_entropy(&self, data: ArrayView2<f64>) -> f64 {
        let recon = self.visible_probs_batch(self.hidden_probs_batch(data).view());
        let eps = 1e-12;
        let total: f64 = data
            .iter()
            .zip(recon.iter())
            .map(|(&v, &r)| {
                let r = r.clamp(eps, 1.0 - eps);
                -(v * r.ln() + (1.0 - v) * (1.0 - r).ln())
            })
            .sum();
        total / data.nrows() as f64
    }
}

/// One CD-1 step on a mini-batch, drawing hidden samples from `rng`.
pub fn rbm_cd1_update<R: Rng + ?Sized>(
    rbm: &mut Rbm,
    batch: ArrayView2<f64>,
    rate: f64,
    rng: &mut R,
) -> Result<()> {
    let uniforms =
        Array2::from_shape_simple_fn((batch.nrows(), rbm.n_hidden()), || rng.random::<f64>());
    rbm_cd1_update_with_uniforms(rbm, batch, rate, uniforms.view())
}

/// CD-1 with the hidden-state draws supplied: hidden unit `j` of sample `s`
/// is on iff `uniforms[s, j] < p(h_j = 1 | v_s)`.
///
/// The positive phase pairs the data with hidden probabilities; the negative
/// phase pairs the reconstruction probabilities `v'` with `p(h | v')`.
/// Sampled states only drive the reconstruction.
pub fn rbm_cd1_update_with_uniforms(
    rbm: &mut Rbm,
    batch: ArrayView2<f64>,
    rate: f64,
    uniforms: ArrayView2<f64>,
) -> Result<()> {
    if batch.nrows() == 0 {
        return Err(Error::EmptyInput("CD-1 batch is empty"));
    }
    rbm.check_visible(batch.ncols())?;
    if uniforms.dim() != (batch.nrows(), rbm.n_hidden()) {
        return Err(Error::DimensionMismatch {
            expected: batch.nrows() * rbm.n_hidden(),
            found: uniforms.len(),
        });
    }
    let h0 = rbm.hidden_probs_batch(batch);
    let mut sample = h0.clone();
    ndarray::Zip::from(&mut sample)
        .and(&uniforms)
        .for_each(|p, &u| *p = if u < *p { 1.0 } else { 0.0 });
    let v1 = rbm.visible_probs_batch(sample.view());
    let h1 = rbm.hidden_probs_batch(v1.view());

    let scale = rate / batch.nrows() as f64;
    let positive = batch.t().dot(&h0);
    let negative = v1.t().dot(&h1);
    rbm.weights.scaled_add(scale, &(positive - negative));
    rbm.visible_bias
        .scaled_add(scale, &(&batch - &v1).sum_axis(Axis(0)));
    rbm.hidden_bias
        .scaled_add(scale, &(&h0 - &h1).sum_axis(Axis(0)));
    Ok(())
}

/// Train for `epochs` passes of shuffled mini-batches.
pub fn rbm_train<R1: Rng, R2: Rng>(
    rbm: &mut Rbm,
    data: ArrayView2<f64>,
    epochs: usize,
    rate: f64,
    batch_size: usize,
    sampling: &mut R1,
    shuffle: &mut R2,
) -> Result<()> {
    rbm.check_visible(data.ncols())?;
    if batch_size == 0 {
        return Err(Error::InvalidParameter(
            "batch size must be positive".into(),
        ));
    }
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    for _ in 0..epochs {
        order.shuffle(shuffle);
        for chunk in order.chunks(batch_size) {
            let batch = data.select(Axis(0), chunk);
            rbm_cd1_update(rbm, batch.view(), rate, sampling)?;
        }
    }
    Ok(())
}
