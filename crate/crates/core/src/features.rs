//! The nine per-channel window features.
//!
//! Peaks and valleys are interior samples where the sign of the first
//! difference flips. Zero differences carry the sign of the last non-zero
//! difference, and a turn after a plateau is placed on the plateau's first
//! sample. Undefined quantities (log of zero, variation with fewer than two
//! pairs) are reported as `0` so every vector stays finite.

use crate::error::{Error, Result};
use crate::{FeatureVector, FEATURES_PER_CHANNEL};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeaksValleys {
    pub peaks: Vec<usize>,
    pub valleys: Vec<usize>,
}

impl PeaksValleys {
    pub fn num_peaks(&self) -> usize {
        self.peaks.len()
    }

    pub fn num_valleys(&self) -> usize {
        self.valleys.len()
    }
}

pub fn detect_peaks_valleys(window: &[f64]) -> PeaksValleys {
    let mut out = PeaksValleys::default();
    // (sign, index just after the last non-zero difference)
    let mut last: Option<(bool, usize)> = None;
    for (i, pair) in window.windows(2).enumerate() {
        let d = pair[1] - pair[0];
        if d == 0.0 {
            continue;
        }
        let rising = d > 0.0;
        if let Some((was_rising, turn)) = last {
            match (was_rising, rising) {
                (true, false) => out.peaks.push(turn),
                (false, true) => out.valleys.push(turn),
                _ => {}
            }
        }
        last = Some((rising, i + 1));
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelFeatures {
    pub area: f64,
    pub normalized_decay: f64,
    pub line_length: f64,
    pub mean_energy: f64,
    pub avg_peak_amplitude: f64,
    pub avg_valley_amplitude: f64,
    pub normalized_peak_number: f64,
    pub peak_variation: f64,
    pub rms: f64,
}

impl ChannelFeatures {
    /// Features in vector order.
    pub fn to_array(&self) -> [f64; FEATURES_PER_CHANNEL] {
        [
            self.area,
            self.normalized_decay,
            self.line_length,
            self.mean_energy,
            self.avg_peak_amplitude,
            self.avg_valley_amplitude,
            self.normalized_peak_number,
            self.peak_variation,
            self.rms,
        ]
    }
}

pub const FEATURE_NAMES: [&str; FEATURES_PER_CHANNEL] = [
    "area",
    "normalized_decay",
    "line_length",
    "mean_energy",
    "avg_peak_amplitude",
    "avg_valley_amplitude",
    "normalized_peak_number",
    "peak_variation",
    "rms",
];

fn log_mean_square(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let ms = values.map(|x| x * x).sum::<f64>() / n as f64;
    if ms > 0.0 {
        ms.log10()
    } else {
        0.0
    }
}

/// Mean and sample standard deviation.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Compute the nine features of one channel's window.
///
/// # Panics
/// If the window has fewer than two samples.
pub fn channel_features(x: &[f64]) -> ChannelFeatures {
    let w = x.len();
    assert!(w >= 2, "a window needs at least two samples");
    let wf = w as f64;

    let area = x.iter().sum::<f64>() / wf;
    let mean_energy = x.iter().map(|v| v * v).sum::<f64>() / wf;

    let mut falling = 0usize;
    let mut line_length = 0.0;
    for pair in x.windows(2) {
        let d = pair[1] - pair[0];
        if d < 0.0 {
            falling += 1;
        }
        line_length += d.abs();
    }
    let normalized_decay = (falling as f64 / (wf - 1.0) - 0.5).abs();
    let mean_abs_diff = line_length / (wf - 1.0);

    let pv = detect_peaks_valleys(x);
    let k = pv.num_peaks();
    let avg_peak_amplitude = log_mean_square(pv.peaks.iter().map(|&i| x[i]));
    let avg_valley_amplitude = log_mean_square(pv.valleys.iter().map(|&i| x[i]));
    let normalized_peak_number = if mean_abs_diff > 0.0 {
        k as f64 / mean_abs_diff
    } else {
        0.0
    };

    let pairs = k.min(pv.num_valleys());
    let peak_variation = if pairs >= 2 {
        let (index_gaps, value_gaps): (Vec<f64>, Vec<f64>) = pv
            .peaks
            .iter()
            .zip(&pv.valleys)
            .map(|(&p, &v)| (p as f64 - v as f64, x[p] - x[v]))
            .unzip();
        let (_, sd_index) = mean_sd(&index_gaps);
        let (_, sd_value) = mean_sd(&value_gaps);
        let denom = sd_index * sd_value;
        if denom > 0.0 {
            1.0 / denom
        } else {
            0.0
        }
    } else {
        0.0
    };

    ChannelFeatures {
        area,
        normalized_decay,
        line_length,
        mean_energy,
        avg_peak_amplitude,
        avg_valley_amplitude,
        normalized_peak_number,
        peak_variation,
        rms: mean_energy.sqrt(),
    }
}

/// Concatenate the features of every channel, channel-major.
pub fn window_features(samples: &[Vec<f64>]) -> Result<FeatureVector> {
    let w = samples
        .first()
        .map(Vec::len)
        .ok_or(Error::EmptyInput("window has no channels"))?;
    if w < 2 {
        return Err(Error::InvalidParameter(format!(
            "window has {w} samples, need at least 2"
        )));
    }
    let mut out = Vec::with_capacity(samples.len() * FEATURES_PER_CHANNEL);
    for ch in samples {
        if ch.len() != w {
            return Err(Error::DimensionMismatch {
                expected: w,
                found: ch.len(),
            });
        }
        out.extend_from_slice(&channel_features(ch).to_array());
    }
    Ok(out)
}
