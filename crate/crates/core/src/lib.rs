//! Seizure detection on multichannel EEG.
//!
//! The pipeline reads recordings ([`ingestion`]), z-scores and truncates each
//! channel ([`preprocessing`]), reduces every one-second window to nine
//! features per channel ([`features`]), and classifies the resulting vectors
//! with nearest neighbours, SVMs, logistic regression ([`classifiers`]) or a
//! deep belief network ([`dbn`]). [`evaluation`] holds the split protocols and
//! metrics, [`costmodel`] the embedded memory/computation estimates.

pub mod classifiers;
pub mod commands;
pub mod config;
pub mod container;
pub mod costmodel;
pub mod dbn;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingestion;
pub mod preprocessing;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

/// Feature vector of one window: `channels × 9` values, channel-major.
pub type FeatureVector = Vec<f64>;

/// Number of features computed per channel.
pub const FEATURES_PER_CHANNEL: usize = 9;
