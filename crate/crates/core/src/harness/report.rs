//! Report schema and writers.
//!
//! A report is a flat list of named blocks. JSON carries the whole report;
//! CSV writes one file per block plus `meta.csv` for the config echo and
//! provenance.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{HarnessError, HarnessResult};
use crate::qcore::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch. The only field allowed to differ
    /// between reruns of the same config.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockData {
    Scalar {
        value: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    /// Row-major real and imaginary parts; `im` is omitted for real data.
    Matrix {
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        re: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Tolerance the value is expected to meet, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(flatten)]
    pub data: BlockData,
}

impl Block {
    pub fn scalar(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            unit: None,
            tolerance: None,
            data: BlockData::Scalar { value, sigma: None },
        }
    }

    pub fn estimate(name: &str, value: f64, sigma: f64) -> Self {
        Self {
            data: BlockData::Scalar {
                value,
                sigma: Some(sigma),
            },
            ..Self::scalar(name, value)
        }
    }

    pub fn real_matrix(
        name: &str,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        re: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            name: name.into(),
            unit: None,
            tolerance: None,
            data: BlockData::Matrix {
                row_labels,
                col_labels,
                re,
                im: None,
            },
        }
    }

    /// Complex matrix with computational-basis labels `0, 1, …`.
    pub fn complex_matrix(name: &str, m: &CMatrix) -> Self {
        let labels = |n: usize| (0..n).map(|k| k.to_string()).collect::<Vec<_>>();
        let part = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| clean(f(&m[(i, j)]))).collect())
                .collect()
        };
        Self {
            name: name.into(),
            unit: None,
            tolerance: None,
            data: BlockData::Matrix {
                row_labels: labels(m.nrows()),
                col_labels: labels(m.ncols()),
                re: part(|z| z.re),
                im: Some(part(|z| z.im)),
            },
        }
    }

    pub fn table(name: &str, columns: &[&str], rows: Vec<Vec<Value>>) -> Self {
        Self {
            name: name.into(),
            unit: None,
            tolerance: None,
            data: BlockData::Table {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            },
        }
    }

    pub fn with_unit(mut self, unit: &str) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn scalar_value(&self) -> Option<f64> {
        match self.data {
            BlockData::Scalar { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Maps `-0.0` to `0.0` so that sign-of-zero noise never reaches a report.
pub(crate) fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: Value,
    pub results: Vec<Block>,
    pub provenance: Provenance,
}

impl Report {
    pub fn block(&self, name: &str) -> Option<&Block> {
        self.results.iter().find(|b| b.name == name)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.block(name).and_then(Block::scalar_value)
    }

    /// Pretty JSON of the report with the timestamp removed. Identical
    /// configs give identical bodies.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Some(p) = v.get_mut("provenance").and_then(Value::as_object_mut) {
            p.remove("timestamp");
        }
        serde_json::to_string_pretty(&v).expect("report serialises")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn write_json(&self, path: &Path) -> HarnessResult<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|e| HarnessError::io(path, e))
    }

    /// One CSV per block in directory `dir`, plus `meta.csv`.
    pub fn write_csv_dir(&self, dir: &Path) -> HarnessResult<()> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let path = dir.join("meta.csv");
        self.write_meta(csv_writer(&path)?)
            .map_err(|e| HarnessError::io(&path, e))?;
        for block in &self.results {
            let path = dir.join(format!("{}.csv", block.name));
            write_block(csv_writer(&path)?, block).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }

    /// All blocks on one stream, each preceded by a `# name` line.
    pub fn write_csv_stream<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# meta")?;
        self.write_meta(csv::Writer::from_writer(&mut out))?;
        for block in &self.results {
            writeln!(out, "# {}", block.name)?;
            write_block(csv::Writer::from_writer(&mut out), block)?;
        }
        Ok(())
    }

    fn write_meta<W: Write>(&self, mut w: csv::Writer<W>) -> std::io::Result<()> {
        w.write_record(["key", "value"])?;
        if let Some(obj) = self.config.as_object() {
            for (k, v) in obj {
                w.write_record([format!("config.{k}"), value_cell(v)])?;
            }
        }
        let p = &self.provenance;
        w.write_record(["provenance.tool", &p.tool])?;
        w.write_record(["provenance.version", &p.version])?;
        w.write_record(["provenance.seed".to_string(), p.seed.to_string()])?;
        w.write_record(["provenance.timestamp".to_string(), p.timestamp.to_string()])?;
        w.flush()
    }
}

fn csv_writer(path: &Path) -> HarnessResult<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn opt_cell<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn write_block<W: Write>(mut w: csv::Writer<W>, block: &Block) -> std::io::Result<()> {
    match &block.data {
        BlockData::Scalar { value, sigma } => {
            w.write_record(["value", "sigma", "unit", "tolerance"])?;
            w.write_record([
                value.to_string(),
                opt_cell(sigma),
                opt_cell(&block.unit),
                opt_cell(&block.tolerance),
            ])?;
        }
        BlockData::Matrix {
            row_labels,
            col_labels,
            re,
            im,
        } => {
            w.write_record(["row", "col", "re", "im"])?;
            for (i, r) in row_labels.iter().enumerate() {
                for (j, c) in col_labels.iter().enumerate() {
                    let imag = im.as_ref().map(|m| m[i][j]).unwrap_or(0.0);
                    w.write_record([r.clone(), c.clone(), re[i][j].to_string(), imag.to_string()])?;
                }
            }
        }
        BlockData::Table { columns, rows } => {
            w.write_record(columns)?;
            for row in rows {
                w.write_record(row.iter().map(value_cell))?;
            }
        }
    }
    w.flush()
}
