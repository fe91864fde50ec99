//! Per-channel z-scoring with percentile truncation, and min-max scaling of
//! feature vectors.

use crate::error::{Error, Result};
use crate::ingestion::Record;
use crate::FeatureVector;

/// Value substituted for samples above the upper percentile.
pub const CLAMP_HIGH: f64 = 2.0;
/// Value substituted for samples below the lower percentile.
pub const CLAMP_LOW: f64 = -2.0;
pub const LOWER_PERCENTILE: f64 = 2.5;
pub const UPPER_PERCENTILE: f64 = 97.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// 2.5th percentile of the z-scored values.
    pub p_low: f64,
    /// 97.5th percentile of the z-scored values.
    pub p_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub channels: Vec<ChannelStat>,
}

/// Nearest-rank percentile of sorted data: element `ceil(p/100 · n)` (1-based).
pub fn nearest_rank(sorted: &[f64], percentile: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((percentile / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Replace values above `p_high` with `+2` and below `p_low` with `-2`.
pub fn clamp_channel(values: &mut [f64], p_low: f64, p_high: f64) {
    for v in values {
        if *v > p_high {
            *v = CLAMP_HIGH;
        } else if *v < p_low {
            *v = CLAMP_LOW;
        }
    }
}

/// Z-score and truncate one channel. A constant channel becomes all zeros.
pub fn normalize_channel(values: &[f64]) -> (Vec<f64>, ChannelStat) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 || !std.is_finite() {
        let stat = ChannelStat {
            mean,
            std: 0.0,
            p_low: 0.0,
            p_high: 0.0,
        };
        return (vec![0.0; values.len()], stat);
    }
    let mut z: Vec<f64> = values.iter().map(|x| (x - mean) / std).collect();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let p_low = nearest_rank(&sorted, LOWER_PERCENTILE);
    let p_high = nearest_rank(&sorted, UPPER_PERCENTILE);
    clamp_channel(&mut z, p_low, p_high);
    (
        z,
        ChannelStat {
            mean,
            std,
            p_low,
            p_high,
        },
    )
}

/// Normalize every channel of a record independently.
pub fn normalize_record(record: &Record) -> (Record, ChannelStats) {
    let (channels, stats): (Vec<_>, Vec<_>) = record
        .channels()
        .iter()
        .map(|ch| normalize_channel(ch))
        .unzip();
    (
        record.map_channels(channels),
        ChannelStats { channels: stats },
    )
}

/// Per-feature range learned from a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(vectors: &[FeatureVector]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or(Error::EmptyInput("no vectors to fit a scaler"))?;
        let mut mins = first.clone();
        let mut maxs = first.clone();
        for v in &vectors[1..] {
            if v.len() != mins.len() {
                return Err(Error::DimensionMismatch {
                    expected: mins.len(),
                    found: v.len(),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                mins[i] = mins[i].min(x);
                maxs[i] = maxs[i].max(x);
            }
        }
        Ok(MinMaxScaler { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Scale into `[0, 1]`, clamping values outside the fitted range.
    /// Features with a degenerate range map to `0.5`.
    pub fn apply(&self, v: &[f64]) -> Result<FeatureVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(v.iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect())
    }

    pub fn apply_all(&self, vectors: &[FeatureVector]) -> Result<Vec<FeatureVector>> {
        vectors.iter().map(|v| self.apply(v)).collect()
    }
}
