use std::path::Path;

use super::Record;
use crate::error::{Error, Result};

/// Read a recording stored as rows of samples, one column per channel.
///
/// The first row is a header of channel names when none of its cells is
/// numeric. The patient and record id default to the file stem.
pub fn read_csv(path: &Path, sample_rate: u32) -> Result<Record> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: shown.clone(),
            message: e.to_string(),
        })?;

    let mut labels: Option<Vec<String>> = None;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && row.iter().all(|cell| cell.parse::<f64>().is_err()) {
            labels = Some(row.iter().map(str::to_string).collect());
            width = Some(row.len());
            continue;
        }
        let expected = *width.get_or_insert(row.len());
        if row.len() != expected {
            return Err(Error::CsvColumns {
                path: shown,
                row: line,
                expected,
                found: row.len(),
            });
        }
        if channels.is_empty() {
            channels = vec![Vec::new(); expected];
        }
        for (c, cell) in row.iter().enumerate() {
            let v = cell.parse::<f64>().map_err(|_| Error::CsvCell {
                path: shown.clone(),
                row: line,
                column: c + 1,
                value: cell.to_string(),
            })?;
            channels[c].push(v);
        }
    }

    if channels.is_empty() {
        return Err(Error::EmptyInput("CSV recording has no sample rows"));
    }
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("record")
        .to_string();
    let record = Record::new(stem, channels, sample_rate)?;
    Ok(match labels {
        Some(l) => record.with_channel_labels(l),
        None => record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_rows(rows: usize, cols: usize, header: bool) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        if header {
            let h: Vec<String> = (0..cols).map(|c| format!("FP{c}")).collect();
            writeln!(f, "{}", h.join(",")).unwrap();
        }
        for r in 0..rows {
            let cells: Vec<String> = (0..cols).map(|c| format!("{}", r * cols + c)).collect();
            writeln!(f, "{}", cells.join(",")).unwrap();
        }
        f
    }

    #[test]
    fn two_seconds_two_channels() {
        let f = write_rows(512, 2, true);
        let r = read_csv(f.path(), 256).unwrap();
        assert_eq!(r.num_channels(), 2);
        assert_eq!(r.duration(), 2);
        assert_eq!(r.channel_labels, vec!["FP0", "FP1"]);
        assert_eq!(r.channels()[1][3], 7.0);
    }

    #[test]
    fn partial_second_dropped() {
        let f = write_rows(300, 1, false);
        let r = read_csv(f.path(), 256).unwrap();
        assert_eq!(r.duration(), 1);
        assert_eq!(r.channels()[0].len(), 256);
    }

    #[test]
    fn bad_cell_reports_position() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "1,2\n3,abc\n").unwrap();
        match read_csv(f.path(), 1).unwrap_err() {
            Error::CsvCell {
                row, column, value, ..
            } => {
                assert_eq!((row, column, value.as_str()), (2, 2, "abc"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn inconsistent_columns() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "1,2\n3,4,5\n").unwrap();
        assert!(matches!(
            read_csv(f.path(), 1).unwrap_err(),
            Error::CsvColumns {
                row: 2,
                expected: 2,
                found: 3,
                ..
            }
        ));
    }
}
