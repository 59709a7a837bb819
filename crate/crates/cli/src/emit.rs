//! CSV and JSON output. CSV uses LF line endings and 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rothe_px_core::MeshFunction;
use serde::Serialize;

use crate::CliError;

/// `v` with 17 significant digits in scientific notation (`.` decimal separator).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = Cell>) {
        let mut n = 0;
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::Int(v) => write!(self.text, "{v}").expect("string write"),
                Cell::Float(v) => self.text.push_str(&fmt_f64(v)),
                Cell::Text(s) => self.text.push_str(&s),
            }
            n += 1;
        }
        assert_eq!(n, self.columns, "row width must match the header");
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// `vertex_id, x, [y], value`
pub fn mesh_function_csv(u: &MeshFunction<f64>) -> Csv {
    let mesh = u.mesh();
    let two_d = mesh.dimension() == 2;
    let mut csv = Csv::new(if two_d { &["vertex_id", "x", "y", "value"] } else { &["vertex_id", "x", "value"] });
    for (i, &v) in u.values().iter().enumerate() {
        let x = mesh.vertex(i);
        if two_d {
            csv.row([i.into(), x[0].into(), x[1].into(), v.into()]);
        } else {
            csv.row([i.into(), x[0].into(), v.into()]);
        }
    }
    csv
}

/// Output directory; created on first write.
pub struct OutDir {
    root: PathBuf,
    quiet: bool,
}

impl OutDir {
    pub fn new(root: &Path, quiet: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), quiet })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if !self.quiet {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, csv: &Csv) -> Result<(), CliError> {
        self.write(name, csv.as_str())
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn header_only_when_empty() {
        let csv = Csv::new(&["n", "t"]);
        assert_eq!(csv.as_str(), "n,t\n");
    }

    #[test]
    fn rows_use_lf_and_dot() {
        let mut csv = Csv::new(&["n", "v"]);
        csv.row([3usize.into(), 1.5f64.into()]);
        assert_eq!(csv.as_str(), "n,v\n3,1.5000000000000000e0\n");
        assert!(!csv.as_str().contains('\r'));
    }
}
