//! CSV output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// One checked property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl PropertyRow {
    /// Passes when `max_residual <= threshold`.
    pub fn at_most(name: impl Into<String>, samples: usize, max_residual: f64, threshold: f64) -> Self {
        Self { name: name.into(), samples, max_residual, threshold, pass: max_residual <= threshold }
    }

    /// A boolean property, recorded as residual 0 or 1 against threshold 0.
    pub fn holds(name: impl Into<String>, samples: usize, ok: bool) -> Self {
        Self { name: name.into(), samples, max_residual: if ok { 0.0 } else { 1.0 }, threshold: 0.0, pass: ok }
    }
}

pub const TWIST_CONVENTION: &str =
    "twist convention: Ta: b->ba, Tb: a->aB, Tc: d->dc, Td: c->cD; intersection form <a,b> = <c,d> = -1";

/// Writes rows to `dir/name` with optional `#` header lines.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, header: &[&str], rows: &[T]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let io = |e| CliError::Io(path.display().to_string(), e);
    let mut file = File::create(&path).map_err(io)?;
    for line in header {
        writeln!(file, "# {line}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Csv(path.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(io)?;
    Ok(path)
}

pub fn write_properties(dir: &Path, command: &str, header: &[&str], rows: &[PropertyRow]) -> Result<PathBuf, CliError> {
    write_csv(dir, &format!("{command}-properties.csv"), header, rows)
}

pub fn write_svg(dir: &Path, command: &str, svg: &str) -> Result<PathBuf, CliError> {
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let path = dir.join(format!("{command}-{stamp}.svg"));
    std::fs::write(&path, svg).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(path)
}

/// Prints the property table and returns whether every row passed.
pub fn summarize(rows: &[PropertyRow]) -> bool {
    for r in rows {
        println!(
            "{:<4} {:<40} n={:<6} residual={:.3e} threshold={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.samples,
            r.max_residual,
            r.threshold
        );
    }
    rows.iter().all(|r| r.pass)
}
