use std::path::Path;

use super::series::FluxSeries;
use crate::error::{Error, Result};

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equally long columns under a header row.
pub fn write_columns(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::ShapeMismatch { expected: format!("{} columns", headers.len()), got: format!("{}", columns.len()) });
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::ShapeMismatch { expected: format!("{rows} rows in every column"), got: "ragged columns".into() });
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| fmt_f64(c[r])))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every column of a headered numeric CSV.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{}: row {} column {}: '{field}'", path.display(), line + 2, c + 1)))?;
            columns[c].push(v);
        }
    }
    Ok((headers, columns))
}

pub fn write_series(path: &Path, series: &FluxSeries, value_header: &str) -> Result<()> {
    write_columns(path, &["t", value_header], &[&series.times, &series.values])
}

/// Reads a two-column `t,value` file.
pub fn read_series(path: &Path) -> Result<FluxSeries> {
    let (headers, mut columns) = read_columns(path)?;
    if headers.len() != 2 {
        return Err(Error::Parse(format!("{}: expected 2 columns, found {}", path.display(), headers.len())));
    }
    let values = columns.pop().unwrap();
    let times = columns.pop().unwrap();
    FluxSeries::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip_is_bitwise() {
        let dir = std::env::temp_dir().join(format!("wave_io_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.013).collect();
        let values: Vec<f64> = times.iter().map(|t| (t * 7.1).sin() / 3.0 + 1e-300).collect();
        let s = FluxSeries::new(times, values).unwrap();
        write_series(&path, &s, "flux").unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back, s);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ragged_columns_rejected() {
        let path = std::env::temp_dir().join("never_written.csv");
        assert!(write_columns(&path, &["a", "b"], &[&[1.0], &[1.0, 2.0]]).is_err());
    }
}
