//! Result tables, their CSV and metadata files, and the standalone plot
//! scripts.
//!
//! CSV bodies are deterministic functions of the results: RFC-4180 quoting,
//! `.` decimal separator, fixed column order, floats printed in shortest
//! round-trip form. Timestamps and other environment facts live only in the
//! `.meta` sidecar so two runs of the same configuration produce
//! byte-identical CSV files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Int,
    Float,
    Text,
}

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            // Bitwise so NaN round-trips compare equal.
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Text(a), Value::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Which figure a table feeds; selects the emitted plot script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    VarianceScaling,
    SlopePath,
    RiskRatio,
}

/// A rectangular, schema-tagged result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<(String, ColumnType)>,
    pub rows: Vec<Vec<Value>>,
    /// Run facts for the sidecar; never written into the CSV body.
    pub metadata: BTreeMap<String, String>,
    pub figure: Option<FigureKind>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[(&str, ColumnType)]) -> Self {
        ResultTable {
            name: name.to_owned(),
            columns: columns.iter().map(|(n, t)| ((*n).to_owned(), *t)).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
            figure: None,
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_owned(), value.to_string());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    pub fn float_column(&self, name: &str) -> Vec<f64> {
        let idx = self.column_index(name).expect("known column");
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Value::Int(v) => *v as f64,
                Value::Float(v) => *v,
                Value::Text(_) => f64::NAN,
            })
            .collect()
    }

    /// Serialize the body only: header plus rows.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(self.columns.iter().map(|(n, _)| n.as_str()))
            .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|v| v.to_string()))
                .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
        }
        writer
            .into_inner()
            .map_err(|e| Error::validation(format!("csv flush failed: {e}")))
    }
}

/// Parse a table back from its CSV body given the expected schema.
pub fn read_table_csv(path: &Path, columns: &[(&str, ColumnType)]) -> Result<ResultTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| Error::validation(format!("csv header: {e}")))?
        .clone();
    if header.len() != columns.len() || header.iter().zip(columns).any(|(h, (n, _))| h != *n) {
        return Err(Error::validation(format!(
            "{}: header does not match the expected schema",
            path.display()
        )));
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("table")
        .to_owned();
    let mut table = ResultTable::new(&name, columns);
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::validation(format!("csv row {}: {e}", k + 2)))?;
        let mut row = Vec::with_capacity(columns.len());
        for (cell, (_, ty)) in record.iter().zip(columns) {
            let value = match ty {
                ColumnType::Int => Value::Int(cell.parse::<i64>().map_err(|_| {
                    Error::validation(format!("row {}: bad integer {cell:?}", k + 2))
                })?),
                ColumnType::Float => Value::Float(cell.parse::<f64>().map_err(|_| {
                    Error::validation(format!("row {}: bad float {cell:?}", k + 2))
                })?),
                ColumnType::Text => Value::Text(cell.to_owned()),
            };
            row.push(value);
        }
        table.push_row(row);
    }
    Ok(table)
}

const VARIANCE_PLOT: &str = r#"#!/usr/bin/env python3
"""Sample size against the scaled variance terms, with the precomputed
regression lines. Reads {CSV} from the directory this script lives in."""
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "{CSV}", newline="") as fh:
    rows = list(csv.DictReader(fh))

n = [float(r["n"]) for r in rows]
fig, axes = plt.subplots(1, 2, figsize=(11, 4))
for ax, kind in zip(axes, ("l2", "kl")):
    ax.plot(n, [float(r[f"mean_{kind}_scaled"]) for r in rows], "o", ms=3)
    ax.plot(n, [float(r[f"fit_{kind}"]) for r in rows], ":", lw=1.5)
    ax.set_xlabel("n")
    ax.set_ylabel(f"n * {kind} variance")
fig.tight_layout()
fig.savefig(here / "fig_variance.png", dpi=150)
print("wrote", here / "fig_variance.png")
"#;

const SLOPE_PLOT: &str = r#"#!/usr/bin/env python3
"""Penalty constant against the selected complexity. Reads {CSV} and the
detected minimal constant from {META}."""
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "{CSV}", newline="") as fh:
    rows = list(csv.DictReader(fh))

meta = {}
for line in (here / "{META}").read_text().splitlines():
    if "=" in line:
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()

k = [float(r["k"]) for r in rows]
c = [float(r["complexity"]) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4))
ax.step(k, c, where="post")
if meta.get("jump_found") == "1":
    ax.axvline(float(meta["k_min"]), ls=":", color="red", label="k_min")
    ax.axvline(2 * float(meta["k_min"]), ls="--", color="green", label="2 k_min")
    ax.legend()
ax.set_xlabel("penalty constant")
ax.set_ylabel("selected complexity")
fig.tight_layout()
fig.savefig(here / "fig_slope.png", dpi=150)
print("wrote", here / "fig_slope.png")
"#;

const RISK_RATIO_PLOT: &str = r#"#!/usr/bin/env python3
"""Sample size against the average risk ratios of the calibrated and the
theoretical-constant selections. Reads {CSV}."""
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "{CSV}", newline="") as fh:
    rows = list(csv.DictReader(fh))

n = [float(r["n"]) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(n, [float(r["mean_slope_ratio"]) for r in rows], "-", label="slope heuristic")
ax.plot(n, [float(r["mean_theory_ratio"]) for r in rows], "--", label="theoretical constant")
ax.axhline(1.0, color="gray", lw=0.5)
ax.set_xlabel("n")
ax.set_ylabel("average risk ratio")
ax.legend()
fig.tight_layout()
fig.savefig(here / "fig_riskratio.png", dpi=150)
print("wrote", here / "fig_riskratio.png")
"#;

fn plot_script(kind: FigureKind, csv_name: &str, meta_name: &str) -> (String, String) {
    let (file, template) = match kind {
        FigureKind::VarianceScaling => ("fig_variance.py", VARIANCE_PLOT),
        FigureKind::SlopePath => ("fig_slope.py", SLOPE_PLOT),
        FigureKind::RiskRatio => ("fig_riskratio.py", RISK_RATIO_PLOT),
    };
    (
        file.to_owned(),
        template
            .replace("{CSV}", csv_name)
            .replace("{META}", meta_name),
    )
}

/// Write the table's CSV body, its metadata sidecar, and (when the table
/// feeds a figure) the matching plot script. Returns the written paths.
/// An empty table still gets its header, plus a warning in the sidecar.
pub fn emit_outputs(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let csv_name = format!("{}.csv", table.name);
    let csv_path = dir.join(&csv_name);
    std::fs::write(&csv_path, table.to_csv_bytes()?).map_err(|e| Error::io(&csv_path, e))?;
    written.push(csv_path);

    let meta_name = format!("{}.meta", table.name);
    let meta_path = dir.join(&meta_name);
    let mut meta = std::fs::File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let mut entries = table.metadata.clone();
    entries.insert("schema_version".into(), SCHEMA_VERSION.to_string());
    entries.insert("rows".into(), table.rows.len().to_string());
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into());
    entries.insert("created_unix".into(), created);
    if table.rows.is_empty() {
        entries.insert("warning".into(), "empty table".into());
        eprintln!("warning: table {} is empty", table.name);
    }
    for (k, v) in &entries {
        writeln!(meta, "{k} = {v}").map_err(|e| Error::io(&meta_path, e))?;
    }
    written.push(meta_path);

    if let Some(kind) = table.figure {
        let (file, script) = plot_script(kind, &csv_name, &meta_name);
        let script_path = dir.join(file);
        std::fs::write(&script_path, script).map_err(|e| Error::io(&script_path, e))?;
        written.push(script_path);
    }
    Ok(written)
}
