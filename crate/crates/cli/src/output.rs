//! CSV and manifest writers. Floats are printed with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ndarray::Array2;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut s = String::with_capacity(1 << 16);
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Dense matrix with a `row,c0,c1,...` header.
pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    let header = std::iter::once("row".to_string()).chain((0..m.ncols()).map(|j| format!("c{j}"))).collect::<Vec<_>>();
    let rows = m.rows().into_iter().enumerate().map(|(i, r)| {
        let mut line = i.to_string();
        for &v in r {
            line.push(',');
            line.push_str(&num(v));
        }
        line
    });
    write_csv(path, &header.join(","), rows)
}

/// `i,j,j_true,j_hat` for every entry.
pub fn write_scatter(path: &Path, truth: &Array2<f64>, estimate: &Array2<f64>) -> Result<()> {
    let n = truth.nrows();
    let rows = (0..n * n).map(|c| {
        let (i, j) = (c / n, c % n);
        format!("{i},{j},{},{}", num(truth[[i, j]]), num(estimate[[i, j]]))
    });
    write_csv(path, "i,j,j_true,j_hat", rows)
}

/// Resolved configuration followed by run information, derived quantities
/// and timings. Only the configuration part is read back.
pub struct Manifest {
    config: String,
    command: String,
    results: Vec<(String, String)>,
    timing: Vec<(String, f64)>,
}

impl Manifest {
    pub fn new(config_ini: String, command: &str) -> Self {
        Self { config: config_ini, command: command.to_string(), results: Vec::new(), timing: Vec::new() }
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    pub fn timing(&mut self, key: &str, seconds: f64) {
        self.timing.push((key.to_string(), seconds));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = self.config.clone();
        writeln!(s, "\n[run]").unwrap();
        writeln!(s, "tool = probenet {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "command = {}", self.command).unwrap();
        if !self.results.is_empty() {
            writeln!(s, "\n[results]").unwrap();
            for (k, v) in &self.results {
                writeln!(s, "{k} = {v}").unwrap();
            }
        }
        writeln!(s, "\n[timing]").unwrap();
        let total: f64 = self.timing.iter().map(|t| t.1).sum();
        for (k, v) in &self.timing {
            writeln!(s, "{k}_seconds = {v:.3}").unwrap();
        }
        writeln!(s, "total_seconds = {total:.3}").unwrap();
        fs::write(path, s).with_context(|| format!("writing {}", path.display()))
    }
}
