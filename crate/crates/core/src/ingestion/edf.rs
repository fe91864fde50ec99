//! Classic EDF with uniform-rate 16-bit signals.
//!
//! Layout: a 256-byte ASCII global header, `ns × 256` bytes of per-signal
//! header fields (each field stored for all signals before the next field),
//! then data records of little-endian two's-complement `i16` samples, signal
//! after signal within a record. EDF+ annotation signals are not interpreted.

use std::fs;
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian};

use super::Record;
use crate::error::{Error, Result};

const GLOBAL_HEADER_LEN: usize = 256;
const SIGNAL_HEADER_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
}

impl SignalHeader {
    /// Affine map from a stored digital value to physical units.
    pub fn to_physical(&self, digital: i16) -> f64 {
        let scale = (self.physical_max - self.physical_min)
            / f64::from(self.digital_max - self.digital_min);
        self.physical_min + f64::from(i32::from(digital) - self.digital_min) * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient: String,
    pub recording: String,
    pub start_date: String,
    pub start_time: String,
    pub reserved: String,
    pub num_records: usize,
    pub record_duration: f64,
    pub signals: Vec<SignalHeader>,
}

impl EdfHeader {
    pub fn header_bytes(&self) -> usize {
        GLOBAL_HEADER_LEN + SIGNAL_HEADER_LEN * self.signals.len()
    }

    fn record_bytes(&self) -> usize {
        2 * self
            .signals
            .iter()
            .map(|s| s.samples_per_record)
            .sum::<usize>()
    }
}

/// A parsed EDF file with raw digital samples, one vector per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfFile {
    pub header: EdfHeader,
    pub digital: Vec<Vec<i16>>,
}

struct Fields<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Fields<'a> {
    fn take(&mut self, width: usize, what: &str) -> Result<&'a str> {
        let end = self.pos + width;
        let raw = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::EdfHeader(format!("header ends inside field {what}")))?;
        self.pos = end;
        std::str::from_utf8(raw)
            .map(str::trim)
            .map_err(|_| Error::EdfHeader(format!("field {what} is not ASCII")))
    }

    fn number<T: std::str::FromStr>(&mut self, width: usize, what: &str) -> Result<T> {
        let s = self.take(width, what)?;
        s.parse()
            .map_err(|_| Error::EdfHeader(format!("field {what} is not numeric: {s:?}")))
    }

    /// One field repeated for every signal.
    fn per_signal<T>(
        &mut self,
        ns: usize,
        what: &str,
        mut f: impl FnMut(&mut Self, &str) -> Result<T>,
    ) -> Result<Vec<T>> {
        (0..ns).map(|_| f(self, what)).collect()
    }
}

pub fn parse_edf(bytes: &[u8]) -> Result<EdfFile> {
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(Error::EdfHeader(format!(
            "file is {} bytes, shorter than the 256-byte header",
            bytes.len()
        )));
    }
    let mut f = Fields { bytes, pos: 0 };
    let version = f.take(8, "version")?.to_string();
    if version != "0" {
        return Err(Error::EdfHeader(format!("unsupported version {version:?}")));
    }
    let patient = f.take(80, "patient")?.to_string();
    let recording = f.take(80, "recording")?.to_string();
    let start_date = f.take(8, "startdate")?.to_string();
    let start_time = f.take(8, "starttime")?.to_string();
    let header_len: usize = f.number(8, "header bytes")?;
    let reserved = f.take(44, "reserved")?.to_string();
    let num_records: i64 = f.number(8, "number of data records")?;
    let record_duration: f64 = f.number(8, "record duration")?;
    let ns: usize = f.number(4, "number of signals")?;

    if ns == 0 {
        return Err(Error::EdfHeader("no signals".into()));
    }
    if header_len != GLOBAL_HEADER_LEN + SIGNAL_HEADER_LEN * ns {
        return Err(Error::EdfHeader(format!(
            "header length {header_len} does not match {ns} signals"
        )));
    }
    if bytes.len() < header_len {
        return Err(Error::EdfHeader(format!(
            "file ends inside the signal headers ({} of {header_len} bytes)",
            bytes.len()
        )));
    }
    if record_duration.is_nan() || record_duration <= 0.0 {
        return Err(Error::EdfHeader(format!(
            "record duration must be positive, got {record_duration}"
        )));
    }

    let text = |f: &mut Fields, w: usize, what: &str| -> Result<Vec<String>> {
        f.per_signal(ns, what, |f, what| Ok(f.take(w, what)?.to_string()))
    };
    let labels = text(&mut f, 16, "label")?;
    let transducers = text(&mut f, 80, "transducer")?;
    let dims = text(&mut f, 8, "physical dimension")?;
    let pmin: Vec<f64> = f.per_signal(ns, "physical minimum", |f, w| f.number(8, w))?;
    let pmax: Vec<f64> = f.per_signal(ns, "physical maximum", |f, w| f.number(8, w))?;
    let dmin: Vec<i32> = f.per_signal(ns, "digital minimum", |f, w| f.number(8, w))?;
    let dmax: Vec<i32> = f.per_signal(ns, "digital maximum", |f, w| f.number(8, w))?;
    let prefilter = text(&mut f, 80, "prefiltering")?;
    let spr: Vec<usize> = f.per_signal(ns, "samples per record", |f, w| f.number(8, w))?;
    text(&mut f, 32, "signal reserved")?;

    let mut signals = Vec::with_capacity(ns);
    for i in 0..ns {
        if dmax[i] <= dmin[i] {
            return Err(Error::EdfHeader(format!(
                "signal {i}: digital maximum {} not above minimum {}",
                dmax[i], dmin[i]
            )));
        }
        if spr[i] == 0 {
            return Err(Error::EdfHeader(format!(
                "signal {i}: zero samples per record"
            )));
        }
        signals.push(SignalHeader {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dimension: dims[i].clone(),
            physical_min: pmin[i],
            physical_max: pmax[i],
            digital_min: dmin[i],
            digital_max: dmax[i],
            prefiltering: prefilter[i].clone(),
            samples_per_record: spr[i],
        });
    }

    let mut header = EdfHeader {
        version,
        patient,
        recording,
        start_date,
        start_time,
        reserved,
        num_records: 0,
        record_duration,
        signals,
    };

    let data = &bytes[header_len..];
    let record_bytes = header.record_bytes();
    let num_records = match num_records {
        -1 => {
            if !data.len().is_multiple_of(record_bytes) {
                return Err(Error::EdfTruncated {
                    expected: data.len().div_ceil(record_bytes) * record_bytes,
                    found: data.len(),
                });
            }
            data.len() / record_bytes
        }
        n if n < 0 => {
            return Err(Error::EdfHeader(format!("invalid number of records {n}")));
        }
        n => n as usize,
    };
    let expected = num_records * record_bytes;
    if data.len() < expected {
        return Err(Error::EdfTruncated {
            expected,
            found: data.len(),
        });
    }
    header.num_records = num_records;

    let mut digital: Vec<Vec<i16>> = header
        .signals
        .iter()
        .map(|s| Vec::with_capacity(s.samples_per_record * num_records))
        .collect();
    let mut pos = 0;
    for _ in 0..num_records {
        for (sig, out) in header.signals.iter().zip(&mut digital) {
            let n = sig.samples_per_record;
            let start = out.len();
            out.resize(start + n, 0);
            LittleEndian::read_i16_into(&data[pos..pos + 2 * n], &mut out[start..]);
            pos += 2 * n;
        }
    }
    Ok(EdfFile { header, digital })
}

impl EdfFile {
    /// Common sample rate of all signals in Hz.
    pub fn sample_rate(&self) -> Result<u32> {
        let rate = |s: &SignalHeader| s.samples_per_record as f64 / self.header.record_duration;
        let first = rate(&self.header.signals[0]);
        for s in &self.header.signals[1..] {
            let r = rate(s);
            if r != first {
                return Err(Error::EdfRateMismatch(first, r));
            }
        }
        if first.fract() != 0.0 || first < 1.0 {
            return Err(Error::EdfHeader(format!(
                "sample rate {first} Hz is not a positive integer"
            )));
        }
        Ok(first as u32)
    }

    pub fn physical(&self, signal: usize) -> Vec<f64> {
        let h = &self.header.signals[signal];
        self.digital[signal]
            .iter()
            .map(|&d| h.to_physical(d))
            .collect()
    }

    /// Convert to a [`Record`]; `fallback_id` names the patient when the
    /// header's patient field is blank or `X`.
    pub fn to_record(&self, fallback_id: &str) -> Result<Record> {
        let rate = self.sample_rate()?;
        let channels = (0..self.digital.len()).map(|i| self.physical(i)).collect();
        let patient = match self.header.patient.split_whitespace().next() {
            Some(p) if p != "X" => p.to_string(),
            _ => fallback_id.to_string(),
        };
        let labels = self
            .header
            .signals
            .iter()
            .map(|s| s.label.clone())
            .collect();
        Ok(Record::new(patient, channels, rate)?
            .with_record_id(fallback_id)
            .with_channel_labels(labels))
    }

    /// Quantize a record to 16 bits using each channel's observed range.
    pub fn from_record(record: &Record) -> EdfFile {
        let rate = record.sample_rate() as usize;
        let signals_and_data: Vec<(SignalHeader, Vec<i16>)> = record
            .channels()
            .iter()
            .zip(&record.channel_labels)
            .map(|(ch, label)| quantize(ch, label, rate))
            .collect();
        let (signals, digital) = signals_and_data.into_iter().unzip();
        EdfFile {
            header: EdfHeader {
                version: "0".into(),
                patient: record.patient_id.clone(),
                recording: format!("Startdate X X X {}", record.record_id),
                start_date: "01.01.00".into(),
                start_time: "00.00.00".into(),
                reserved: String::new(),
                num_records: record.duration(),
                record_duration: 1.0,
                signals,
            },
            digital,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(h.header_bytes() + h.num_records * h.record_bytes());
        put(&mut out, &h.version, 8);
        put(&mut out, &h.patient, 80);
        put(&mut out, &h.recording, 80);
        put(&mut out, &h.start_date, 8);
        put(&mut out, &h.start_time, 8);
        put(&mut out, &h.header_bytes().to_string(), 8);
        put(&mut out, &h.reserved, 44);
        put(&mut out, &h.num_records.to_string(), 8);
        put(&mut out, &format_number(h.record_duration, 8), 8);
        put(&mut out, &h.signals.len().to_string(), 4);
        let sigs = &h.signals;
        sigs.iter().for_each(|s| put(&mut out, &s.label, 16));
        sigs.iter().for_each(|s| put(&mut out, &s.transducer, 80));
        sigs.iter()
            .for_each(|s| put(&mut out, &s.physical_dimension, 8));
        sigs.iter()
            .for_each(|s| put(&mut out, &format_number(s.physical_min, 8), 8));
        sigs.iter()
            .for_each(|s| put(&mut out, &format_number(s.physical_max, 8), 8));
        sigs.iter()
            .for_each(|s| put(&mut out, &s.digital_min.to_string(), 8));
        sigs.iter()
            .for_each(|s| put(&mut out, &s.digital_max.to_string(), 8));
        sigs.iter().for_each(|s| put(&mut out, &s.prefiltering, 80));
        sigs.iter()
            .for_each(|s| put(&mut out, &s.samples_per_record.to_string(), 8));
        sigs.iter().for_each(|_| put(&mut out, "", 32));

        let mut buf = [0u8; 2];
        for r in 0..h.num_records {
            for (s, data) in sigs.iter().zip(&self.digital) {
                let n = s.samples_per_record;
                for &d in &data[r * n..(r + 1) * n] {
                    LittleEndian::write_i16(&mut buf, d);
                    out.extend_from_slice(&buf);
                }
            }
        }
        out
    }
}

fn quantize(channel: &[f64], label: &str, rate: usize) -> (SignalHeader, Vec<i16>) {
    let (lo, hi) = channel
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let (lo, hi) = if lo < hi {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    };
    // Round the range outward to what fits in the 8-character fields and
    // quantize against the values a reader will actually see.
    let physical_min: f64 = format_number_floor(lo).parse().unwrap();
    let physical_max: f64 = format_number_ceil(hi).parse().unwrap();
    let (dmin, dmax) = (i16::MIN as i32, i16::MAX as i32);
    let span = f64::from(dmax - dmin);
    let digital = channel
        .iter()
        .map(|&x| {
            let d = (x - physical_min) / (physical_max - physical_min) * span + f64::from(dmin);
            d.round().clamp(f64::from(dmin), f64::from(dmax)) as i16
        })
        .collect();
    (
        SignalHeader {
            label: label.to_string(),
            transducer: String::new(),
            physical_dimension: "mV".into(),
            physical_min,
            physical_max,
            digital_min: dmin,
            digital_max: dmax,
            prefiltering: String::new(),
            samples_per_record: rate,
        },
        digital,
    )
}

fn put(out: &mut Vec<u8>, s: &str, width: usize) {
    let bytes: Vec<u8> = s
        .bytes()
        .map(|b| {
            if b.is_ascii() && !b.is_ascii_control() {
                b
            } else {
                b'_'
            }
        })
        .take(width)
        .collect();
    out.extend_from_slice(&bytes);
    out.resize(out.len() + width - bytes.len(), b' ');
}

/// Shortest decimal rendering of `v` that fits in `width` characters.
fn format_number(v: f64, width: usize) -> String {
    if v.fract() == 0.0 && v.abs() < 1e7 {
        return format!("{}", v as i64);
    }
    for prec in (0..width).rev() {
        let s = format!("{v:.prec$}");
        if s.len() <= width {
            return s;
        }
    }
    format!("{}", v.round() as i64)
}

fn format_number_floor(v: f64) -> String {
    round_directed(v, f64::floor)
}

fn format_number_ceil(v: f64) -> String {
    round_directed(v, f64::ceil)
}

fn round_directed(v: f64, dir: fn(f64) -> f64) -> String {
    for prec in (0..8).rev() {
        let scale = 10f64.powi(prec);
        let r = dir(v * scale) / scale;
        let s = format!("{r:.*}", prec as usize);
        if s.len() <= 8 {
            return s;
        }
    }
    format!("{}", dir(v) as i64)
}

pub fn read_edf(path: &Path) -> Result<Record> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let file = parse_edf(&bytes)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("record");
    file.to_record(stem)
}

pub fn write_edf(record: &Record, path: &Path) -> Result<()> {
    fs::write(path, EdfFile::from_record(record).to_bytes()).map_err(|e| Error::io(path, e))
}
