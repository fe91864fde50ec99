use super::{check_dim, dot, sigmoid, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrConfig {
    pub rate: f64,
    pub iters: usize,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            rate: 0.1,
            iters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub rate: f64,
    pub iters: usize,
}

impl LrModel {
    pub fn zeros(dim: usize) -> Self {
        LrModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            rate: 0.0,
            iters: 0,
        }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

/// `-[y ln p + (1 - y) ln(1 - p)]` for `p = sigmoid(z)`, computed from `z`.
fn cross_entropy_from_logit(z: f64, y: u8) -> f64 {
    // ln(1 + e^z) - y z, stable for either sign of z.
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    softplus - f64::from(y) * z
}

/// Mean cross-entropy and its gradient with respect to `(weights, bias)`.
pub fn lr_loss_and_gradient(weights: &[f64], bias: f64, data: &Dataset) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        let z = dot(weights, x) + bias;
        loss += cross_entropy_from_logit(z, y);
        let err = sigmoid(z) - f64::from(y);
        for (g, xi) in grad_w.iter_mut().zip(x) {
            *g += err * xi;
        }
        grad_b += err;
    }
    grad_w.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad_w, grad_b / n)
}

/// Full-batch gradient descent on mean cross-entropy from zero weights.
pub fn lr_train(train: &Dataset, config: &LrConfig) -> Result<LrModel> {
    if config.rate.is_nan() || config.rate <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive, got {}",
            config.rate
        )));
    }
    let mut model = LrModel::zeros(train.dim());
    for _ in 0..config.iters {
        let (_, gw, gb) = lr_loss_and_gradient(&model.weights, model.bias, train);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= config.rate * g;
        }
        model.bias -= config.rate * gb;
    }
    model.rate = config.rate;
    model.iters = config.iters;
    Ok(model)
}

/// Label `1` iff the probability is at least one half.
pub fn lr_classify(model: &LrModel, x: &[f64]) -> Result<(u8, f64)> {
    check_dim(model.weights.len(), x)?;
    let p = model.probability(x);
    Ok((u8::from(p >= 0.5), p))
}
