//! On-disk artifacts: `certificate.json`, `energy.csv`, `audit.json`,
//! `verdicts.json`. JSON keys are sorted; CSV numbers carry 17 significant
//! digits so that reading them back is exact.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::pipeline::{Audit, Bundle, Certificate, Series, Verdicts};

pub const CERTIFICATE: &str = "certificate.json";
pub const ENERGY: &str = "energy.csv";
pub const AUDIT: &str = "audit.json";
pub const VERDICTS: &str = "verdicts.json";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pretty JSON with keys sorted at every level.
pub fn to_sorted_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json::Map is a BTreeMap unless preserve_order is enabled
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let text = to_sorted_json(value).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, series: &Series) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t".to_string()];
    header.extend(series.names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (j, t) in series.t.iter().enumerate() {
        let mut row = vec![format_f64(*t)];
        row.extend(series.columns.iter().map(|c| format_f64(c[j])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Series, ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let fmt_err = |msg: String| ReportError::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header.first().map(String::as_str) != Some("t") {
        return Err(fmt_err("first column must be t".into()));
    }
    let names = header[1..].to_vec();
    let mut t = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let mut vals = rec.iter().map(|s| s.trim().parse::<f64>());
        let tv = vals
            .next()
            .and_then(|v| v.ok())
            .ok_or_else(|| fmt_err(format!("row {}: bad t", line + 2)))?;
        t.push(tv);
        for (k, col) in columns.iter_mut().enumerate() {
            let v = vals
                .next()
                .and_then(|v| v.ok())
                .ok_or_else(|| fmt_err(format!("row {}: bad value in column {}", line + 2, names[k])))?;
            col.push(v);
        }
    }
    Ok(Series { names, t, columns })
}

pub fn write_certificate(dir: &Path, c: &Certificate) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join(CERTIFICATE), c)
}

pub fn write_verdicts(dir: &Path, v: &Verdicts) -> Result<(), ReportError> {
    write_json(&dir.join(VERDICTS), v)
}

pub fn write_audit(dir: &Path, a: &Audit) -> Result<(), ReportError> {
    write_json(&dir.join(AUDIT), a)
}

/// Writes every artifact except plots.
pub fn write_bundle(dir: &Path, b: &Bundle) -> Result<(), ReportError> {
    write_certificate(dir, &b.certificate)?;
    write_csv(&dir.join(ENERGY), &b.series)?;
    write_audit(dir, &b.audit)?;
    write_verdicts(dir, &b.verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let s = Series {
            names: vec!["E0".into(), "damping".into()],
            t: vec![0.0, 0.1, 1.0 / 3.0],
            columns: vec![vec![1.0, 2.0f64.sqrt(), 1e-300], vec![std::f64::consts::PI, 5e-324, 0.0]],
        };
        write_csv(&path, &s).unwrap();
        assert_eq!(read_csv(&path).unwrap(), s);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,E0,damping\n"));
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = to_sorted_json(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }
}
