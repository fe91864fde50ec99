//! Baseline classifiers over feature vectors: k-nearest neighbours with
//! Hart's condensation, kernel SVMs trained by SMO, and logistic regression.

pub mod condensed;
pub mod knn;
pub mod logistic;
pub mod svm;

pub use condensed::cnn_condense;
pub use knn::{knn_classify, KnnModel};
pub use logistic::{lr_classify, lr_train, LrConfig, LrModel};
pub use svm::{svm_classify, svm_train, Kernel, SvmConfig, SvmModel};

use crate::error::{Error, Result};
use crate::FeatureVector;

/// Labeled feature vectors. Labels are `1` for seizure, `0` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vectors: Vec<FeatureVector>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(vectors: Vec<FeatureVector>, labels: Vec<u8>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyInput("dataset has no vectors"));
        }
        if vectors.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                found: labels.len(),
            });
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("feature vectors are empty"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {l} is not binary")));
        }
        Ok(Dataset { vectors, labels })
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }

    /// Subset by indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x)
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        })
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function, evaluated without overflow for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
