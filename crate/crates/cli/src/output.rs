//! CSV writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::path::Path;

use dstorus::evolution::Trajectory;

use crate::error::{CliError, CliResult};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let f = File::create(path).map_err(CliError::io(path))?;
    Ok(csv::Writer::from_writer(f))
}

pub fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = writer(path)?;
    let err = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn hs_column(s: f64) -> String {
    format!("hs_{s}")
}

pub fn trajectory_header(s_list: &[f64]) -> Vec<String> {
    let mut h = vec!["t".to_string(), "l2".to_string()];
    h.extend(s_list.iter().map(|&s| hs_column(s)));
    h.extend(["linf", "l4acc", "tail_frac", "dt"].map(String::from));
    h
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![fmt(s.t), fmt(s.mass)];
            r.extend(s.hs.iter().map(|&v| fmt(v)));
            r.extend([fmt(s.linf), fmt(s.l4_integral), fmt(s.tail), fmt(s.dt)]);
            r
        })
        .collect();
    write_rows(path, &trajectory_header(&traj.s_list), &rows)
}

/// A CSV file read fully into named float columns; empty cells read as NaN.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e.to_string()))?;
        let headers: Vec<String> = r.headers().map_err(|e| CliError::format(path, e.to_string()))?.iter().map(String::from).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
            for (i, field) in rec.iter().enumerate().take(headers.len()) {
                let field = field.trim();
                if field.is_empty() {
                    columns[i].push(f64::NAN);
                    continue;
                }
                let v: f64 = field
                    .parse()
                    .map_err(|_| CliError::format(path, format!("row {}: column `{}` is not a number: {field:?}", line + 2, headers[i])))?;
                columns[i].push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            let s = fmt(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn header_layout() {
        assert_eq!(trajectory_header(&[0.6, 0.8]), ["t", "l2", "hs_0.6", "hs_0.8", "linf", "l4acc", "tail_frac", "dt"]);
    }
}
