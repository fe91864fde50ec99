//! Recordings, seizure annotations and one-second labeled windows.

mod annotations;
mod csv_input;
pub mod edf;

use std::path::Path;

pub use annotations::{read_annotations, SeizureAnnotations};
pub use csv_input::read_csv;
pub use edf::{read_edf, write_edf};

use crate::error::{Error, Result};

/// One recording: `C` equal-length channels sampled at `sample_rate` Hz.
///
/// Channel length is always `sample_rate × duration`; a tail shorter than one
/// second is dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub patient_id: String,
    /// Identifier used to look up annotations, normally the file stem.
    pub record_id: String,
    pub channel_labels: Vec<String>,
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
    duration: usize,
}

impl Record {
    pub fn new(
        patient_id: impl Into<String>,
        channels: Vec<Vec<f64>>,
        sample_rate: u32,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidRecord("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidRecord("record has no channels".into()));
        }
        let len = channels[0].len();
        if let Some((c, ch)) = channels.iter().enumerate().find(|(_, ch)| ch.len() != len) {
            return Err(Error::InvalidRecord(format!(
                "channel {c} has {} samples, channel 0 has {len}",
                ch.len()
            )));
        }
        let rate = sample_rate as usize;
        let duration = len / rate;
        let mut channels = channels;
        for ch in &mut channels {
            ch.truncate(duration * rate);
        }
        let patient_id = patient_id.into();
        let channel_labels = (0..channels.len()).map(|c| format!("ch{c}")).collect();
        Ok(Record {
            record_id: patient_id.clone(),
            patient_id,
            channel_labels,
            channels,
            sample_rate,
            duration,
        })
    }

    pub fn with_record_id(mut self, record_id: impl Into<String>) -> Self {
        self.record_id = record_id.into();
        self
    }

    pub fn with_channel_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.channels.len());
        self.channel_labels = labels;
        self
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Whole seconds of data.
    pub fn duration(&self) -> usize {
        self.duration
    }

    /// Same metadata, new channel data of identical shape.
    pub(crate) fn map_channels(&self, channels: Vec<Vec<f64>>) -> Record {
        debug_assert_eq!(channels.len(), self.channels.len());
        Record {
            channels,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Record {
        Record {
            patient_id: self.patient_id.clone(),
            record_id: self.record_id.clone(),
            channel_labels: self.channel_labels.clone(),
            channels: Vec::new(),
            sample_rate: self.sample_rate,
            duration: self.duration,
        }
    }
}

/// One second of a recording with its binary seizure label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub patient_id: String,
    pub window_index: usize,
    /// `C × W` raw samples, `W` = sample rate.
    pub samples: Vec<Vec<f64>>,
    pub label: u8,
}

/// Cut a record into one-second windows.
///
/// Window `s` is a seizure window when at least half of its samples fall
/// inside some annotated interval. A sample `h` sits at time `h / rate`.
pub fn label_windows(record: &Record, ann: &SeizureAnnotations) -> Vec<LabeledWindow> {
    let rate = record.sample_rate as usize;
    let duration = record.duration;
    let total = (duration * rate) as f64;

    let mut clipped = false;
    // Sample-index ranges covered by each interval: [ceil(a·H), ceil(b·H)).
    let mut covered: Vec<(usize, usize)> = Vec::with_capacity(ann.intervals().len());
    for &(start, end) in ann.intervals() {
        let lo = (start * rate as f64).ceil();
        let hi = (end * rate as f64).ceil();
        if hi > total {
            clipped = true;
        }
        let lo = lo.min(total) as usize;
        let hi = hi.min(total) as usize;
        if lo < hi {
            covered.push((lo, hi));
        }
    }
    if clipped {
        log::warn!(
            "{}: seizure annotations extend past the {duration} s recording; clipped",
            record.record_id
        );
    }

    (0..duration)
        .map(|s| {
            let (w0, w1) = (s * rate, (s + 1) * rate);
            let inside: usize = covered
                .iter()
                .map(|&(lo, hi)| hi.min(w1).saturating_sub(lo.max(w0)))
                .sum();
            let label = u8::from(2 * inside >= rate);
            LabeledWindow {
                patient_id: record.patient_id.clone(),
                window_index: s,
                samples: record
                    .channels
                    .iter()
                    .map(|ch| ch[w0..w1].to_vec())
                    .collect(),
                label,
            }
        })
        .collect()
}

/// Read a recording, choosing the parser from the file extension.
///
/// `csv_rate` is required for `.csv`/`.txt` input.
pub fn read_recording(path: &Path, csv_rate: Option<u32>) -> Result<Record> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("edf") => read_edf(path),
        Some("csv") | Some("txt") => {
            let rate = csv_rate.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{}: a sample rate is required for CSV recordings",
                    path.display()
                ))
            })?;
            read_csv(path, rate)
        }
        _ => Err(Error::InvalidParameter(format!(
            "{}: unsupported recording format (expected .edf or .csv)",
            path.display()
        ))),
    }
}
