//! Synthetic multi-patient EEG.
//!
//! Background activity is band-limited noise (one-pole high-pass at 0.5 Hz,
//! low-pass near 30 Hz) plus a drifting alpha rhythm. Seizures are
//! high-amplitude 3–5 Hz oscillations with tapered onset and offset, present
//! on most but not all channels. Rhythm frequencies, amplitudes, channel
//! involvement and noise colour vary per patient.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingestion::edf::write_edf;
use crate::ingestion::{Record, SeizureAnnotations};
use crate::rng::{stream_rng, Stream, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub patients: usize,
    /// Recording length per patient, seconds.
    pub seconds: usize,
    pub channels: usize,
    pub sample_rate: u32,
    /// Target share of seizure time.
    pub seizure_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            patients: 5,
            seconds: 600,
            channels: 23,
            sample_rate: 256,
            seizure_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.patients == 0 || self.seconds == 0 || self.channels == 0 || self.sample_rate == 0 {
            return Err(Error::InvalidParameter(
                "patients, seconds, channels and sample rate must be positive".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.seizure_fraction) {
            return Err(Error::InvalidParameter(format!(
                "seizure fraction must lie in [0, 0.5), got {}",
                self.seizure_fraction
            )));
        }
        Ok(())
    }
}

/// One generated patient.
#[derive(Debug, Clone)]
pub struct SynthPatient {
    pub record: Record,
    pub annotations: SeizureAnnotations,
}

#[derive(Debug, Clone)]
struct PatientStyle {
    alpha_hz: f64,
    alpha_gain: f64,
    lowpass_hz: f64,
    seizure_hz: f64,
    seizure_gain: f64,
    involved: Vec<bool>,
    channel_gain: Vec<f64>,
}

fn draw_style(rng: &mut StreamRng, channels: usize) -> PatientStyle {
    let involvement = rng.random_range(0.6..=1.0);
    let mut involved: Vec<bool> = (0..channels)
        .map(|_| rng.random::<f64>() < involvement)
        .collect();
    if !involved.iter().any(|&b| b) {
        involved[0] = true;
    }
    PatientStyle {
        alpha_hz: rng.random_range(8.0..12.0),
        alpha_gain: rng.random_range(0.3..0.8),
        lowpass_hz: rng.random_range(20.0..40.0),
        seizure_hz: rng.random_range(3.0..5.0),
        seizure_gain: rng.random_range(4.0..7.0),
        involved,
        channel_gain: (0..channels)
            .map(|_| rng.random_range(20.0..60.0))
            .collect(),
    }
}

/// Non-overlapping seizure intervals covering roughly `fraction · seconds`.
fn draw_intervals(rng: &mut StreamRng, seconds: usize, fraction: f64) -> Vec<(f64, f64)> {
    let total = fraction * seconds as f64;
    if total < 1.0 {
        return Vec::new();
    }
    let events = ((total / 20.0).round() as usize).clamp(1, 4);
    let len = total / events as f64;
    // One slot per event, seizure placed at a random offset inside it.
    let slot = seconds as f64 / events as f64;
    (0..events)
        .map(|e| {
            let slack = (slot - len).max(0.0);
            let ms = |t: f64| (t * 1000.0).round() / 1000.0;
            let start = ms(e as f64 * slot + rng.random_range(0.0..=slack));
            (start, ms(start + len).min(seconds as f64))
        })
        .collect()
}

/// Envelope in [0, 1]: zero outside, half-second cosine ramps at each edge.
fn envelope(t: f64, intervals: &[(f64, f64)]) -> f64 {
    const RAMP: f64 = 0.5;
    intervals
        .iter()
        .map(|&(a, b)| {
            if t < a || t >= b {
                0.0
            } else {
                let edge = (t - a).min(b - t);
                if edge >= RAMP {
                    1.0
                } else {
                    0.5 - 0.5 * (PI * edge / RAMP).cos()
                }
            }
        })
        .fold(0.0, f64::max)
}

fn one_pole(cut_hz: f64, rate: f64) -> f64 {
    1.0 - (-2.0 * PI * cut_hz / rate).exp()
}

fn generate_patient(config: &SynthConfig, index: usize) -> Result<SynthPatient> {
    let mut rng = stream_rng(config.seed, Stream::Synth, index as u64);
    let style = draw_style(&mut rng, config.channels);
    let intervals = draw_intervals(&mut rng, config.seconds, config.seizure_fraction);
    let rate = config.sample_rate as f64;
    let n = config.seconds * config.sample_rate as usize;
    let lp = one_pole(style.lowpass_hz, rate);
    let hp = one_pole(0.5, rate);
    let env: Vec<f64> = (0..n)
        .map(|h| envelope(h as f64 / rate, &intervals))
        .collect();

    let mut channels = Vec::with_capacity(config.channels);
    for c in 0..config.channels {
        let alpha_phase = rng.random_range(0.0..2.0 * PI);
        let seizure_phase = rng.random_range(0.0..2.0 * PI);
        let detune = rng.random_range(-0.2..0.2);
        let (mut low, mut slow) = (0.0, 0.0);
        let mut x = Vec::with_capacity(n);
        for (h, &e) in env.iter().enumerate() {
            let t = h as f64 / rate;
            let white: f64 = StandardNormal.sample(&mut rng);
            low += lp * (white - low);
            slow += hp * (low - slow);
            let band = (low - slow) * 3.0;
            let alpha =
                style.alpha_gain * (2.0 * PI * (style.alpha_hz + detune) * t + alpha_phase).sin();
            let mut v = band + alpha * (1.0 - e);
            if e > 0.0 && style.involved[c] {
                let w = 2.0 * PI * (style.seizure_hz + detune) * t + seizure_phase;
                v += e * style.seizure_gain * (w.sin() + 0.3 * (2.0 * w).sin());
            }
            x.push(v * style.channel_gain[c]);
        }
        channels.push(x);
    }

    let patient_id = format!("synth{:02}", index + 1);
    let labels = (0..config.channels)
        .map(|c| format!("EEG{:02}", c + 1))
        .collect();
    let record = Record::new(patient_id.clone(), channels, config.sample_rate)?
        .with_record_id(patient_id)
        .with_channel_labels(labels);
    Ok(SynthPatient {
        record,
        annotations: SeizureAnnotations::new(intervals)?,
    })
}

/// Generate every patient in memory.
pub fn synthesize(config: &SynthConfig) -> Result<Vec<SynthPatient>> {
    config.validate()?;
    (0..config.patients)
        .map(|i| generate_patient(config, i))
        .collect()
}

/// Write `<patient>.edf` files plus `labels.csv` into `dir`; returns the EDF paths.
pub fn synthgen(config: &SynthConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut labels: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut paths = Vec::with_capacity(config.patients);
    for i in 0..config.patients {
        let p = generate_patient(config, i)?;
        let path = dir.join(format!("{}.edf", p.record.record_id));
        write_edf(&p.record, &path)?;
        labels.insert(
            p.record.record_id.clone(),
            p.annotations.intervals().to_vec(),
        );
        paths.push(path);
    }
    let mut text = String::from("record_id,start_second,end_second\n");
    for (id, intervals) in &labels {
        for (a, b) in intervals {
            text.push_str(&format!("{id},{a},{b}\n"));
        }
    }
    let label_path = dir.join("labels.csv");
    fs::write(&label_path, text).map_err(|e| Error::io(&label_path, e))?;
    Ok(paths)
}
