//! Hart's condensed nearest neighbour rule.

use rand::seq::SliceRandom;

use super::{squared_distance, Dataset};
use crate::rng::{stream_rng, Stream};

fn nearest_label(train: &Dataset, store: &[usize], x: &[f64]) -> u8 {
    let mut best = (f64::INFINITY, 0u8);
    for &j in store {
        let d = squared_distance(&train.vectors()[j], x);
        if d < best.0 {
            best = (d, train.labels()[j]);
        }
    }
    best.1
}

/// Indices (into `train`) of the condensed store, in insertion order.
pub fn cnn_condense_indices(train: &Dataset, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Condense, 0));

    let mut in_store = vec![false; train.len()];
    let mut store = Vec::new();
    for class in [0u8, 1] {
        if let Some(&i) = order.iter().find(|&&i| train.labels()[i] == class) {
            store.push(i);
            in_store[i] = true;
        }
    }
    store.sort_by_key(|&i| order.iter().position(|&o| o == i));

    loop {
        let mut added = false;
        for &i in &order {
            if in_store[i] {
                continue;
            }
            if nearest_label(train, &store, &train.vectors()[i]) != train.labels()[i] {
                store.push(i);
                in_store[i] = true;
                added = true;
            }
        }
        if !added {
            return store;
        }
    }
}

/// Condense a training set until 1-NN on the store classifies every
/// training vector correctly.
pub fn cnn_condense(train: &Dataset, seed: u64) -> Dataset {
    train.select(&cnn_condense_indices(train, seed))
}
