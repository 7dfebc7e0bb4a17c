//! CSV datasets with `#` metadata rows and JSON provenance sidecars.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::model::SystemParams;

/// A value in a dataset cell. Floats print in shortest round-trip form.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Cell::Empty)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) if v.is_nan() => "nan".into(),
            Cell::F(v) => format!("{v:?}"),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub name: String,
    /// `# key: value` lines written before the header.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Dataset {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Dataset {
            name: name.to_string(),
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn params_meta(&mut self, p: &SystemParams) -> &mut Self {
        for (k, v) in p.as_key_values() {
            self.meta(k, v);
        }
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(&self.columns)?;
        for row in &self.rows {
            cw.write_record(row.iter().map(Cell::render))?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Provenance written next to each dataset.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub dataset: String,
    pub generator: String,
    pub version: String,
    pub preset: Option<String>,
    pub params: SystemParams,
    pub overrides: Vec<String>,
    pub details: serde_json::Value,
}

impl Provenance {
    pub fn new(dataset: &str, preset: Option<&str>, params: &SystemParams, overrides: &[String]) -> Self {
        Provenance {
            dataset: dataset.to_string(),
            generator: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            preset: preset.map(str::to_string),
            params: params.clone(),
            overrides: overrides.to_vec(),
            details: serde_json::Value::Null,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`; returns the CSV path.
pub fn write_dataset(dir: &Path, data: &Dataset, provenance: &Provenance) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", data.name));
    data.write_csv(BufWriter::new(File::create(&csv_path)?))?;
    let json_path = dir.join(format!("{}.json", data.name));
    let mut f = BufWriter::new(File::create(json_path)?);
    serde_json::to_writer_pretty(&mut f, provenance)?;
    writeln!(f)?;
    f.flush()?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_formatting() {
        let mut d = Dataset::new("t", &["x", "y", "s"]);
        d.meta("note", "a b");
        d.push(vec![0.1.into(), Cell::from(Option::<f64>::None), "ok".into()]);
        d.push(vec![1e-300.into(), 3usize.into(), Cell::F(f64::NAN)]);
        let s = d.to_csv_string().unwrap();
        assert_eq!(s, "# note: a b\nx,y,s\n0.1,,ok\n1e-300,3,nan\n");
        let v: f64 = "0.30000000000000004".parse().unwrap();
        assert_eq!(Cell::F(0.1 + 0.2).render().parse::<f64>().unwrap(), v);
    }
}
