use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Seizure intervals of one recording, in seconds, half-open `[start, end)`.
///
/// Always sorted and non-overlapping; overlapping or touching intervals are
/// merged on construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeizureAnnotations {
    intervals: Vec<(f64, f64)>,
}

impl SeizureAnnotations {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(start, end) in &intervals {
            if !(start.is_finite() && end.is_finite() && start >= 0.0 && start < end) {
                return Err(Error::InvalidInterval { start, end });
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (start, end) in intervals {
            match merged.last_mut() {
                Some(last) if start <= last.1 => last.1 = last.1.max(end),
                _ => merged.push((start, end)),
            }
        }
        Ok(SeizureAnnotations { intervals: merged })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Read a `record_id,start_second,end_second` file into per-record annotations.
///
/// A first row whose start column is not numeric is taken as a header. Blank
/// lines and lines starting with `#` are skipped.
pub fn read_annotations(path: &Path) -> Result<BTreeMap<String, SeizureAnnotations>> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(&shown, e))?;

    let mut raw: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(&shown, e))?;
        let line = row.position().map_or(i + 1, |p| p.line() as usize);
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::CsvColumns {
                path: shown,
                row: line,
                expected: 3,
                found: row.len(),
            });
        }
        let parse = |col: usize| {
            row[col].parse::<f64>().map_err(|_| Error::CsvCell {
                path: shown.clone(),
                row: line,
                column: col + 1,
                value: row[col].to_string(),
            })
        };
        let start = match parse(1) {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(e),
        };
        let end = parse(2)?;
        raw.entry(row[0].to_string())
            .or_default()
            .push((start, end));
    }

    raw.into_iter()
        .map(|(id, intervals)| Ok((id, SeizureAnnotations::new(intervals)?)))
        .collect()
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: e.to_string(),
    }
}
