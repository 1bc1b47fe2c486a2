//! Result records and their JSON/CSV serialization. JSON is deterministic
//! for a fixed config and seed apart from the wall-time field; CSV prints
//! floats with 17 significant digits in a fixed, documented column order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Serialize)]
pub struct TargetCheck {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl TargetCheck {
    pub fn new(name: &'static str, value: f64, target: f64, tolerance: f64) -> Self {
        TargetCheck {
            name,
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }
}

/// A (column names, rows) table emitted verbatim in CSV mode.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct ResultRecord {
    pub experiment: &'static str,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, serde_json::Value>,
    pub targets: Vec<TargetCheck>,
    pub seed: u64,
    pub version: &'static str,
    pub wall_ms: f64,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl ResultRecord {
    pub fn new(experiment: &'static str, seed: u64) -> Self {
        ResultRecord {
            experiment,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            targets: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_ms: 0.0,
            table: None,
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.outputs.insert(key.to_string(), value.into());
    }

    pub fn integer(&mut self, key: &str, value: i64) {
        self.outputs.insert(key.to_string(), value.into());
    }

    pub fn array(&mut self, key: &str, values: &[f64]) {
        self.outputs.insert(key.to_string(), values.to_vec().into());
    }

    pub fn all_pass(&self) -> bool {
        self.targets.iter().all(|t| t.pass)
    }
}

pub fn to_json(records: &[ResultRecord]) -> Result<String> {
    let mut text = if records.len() == 1 {
        serde_json::to_string_pretty(&records[0])?
    } else {
        serde_json::to_string_pretty(records)?
    };
    text.push('\n');
    Ok(text)
}

pub fn to_csv(records: &[ResultRecord]) -> String {
    if records.len() == 1 {
        if let Some(table) = &records[0].table {
            let mut out = table.columns.join(",");
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            return out;
        }
    }
    let mut columns: Vec<&String> = Vec::new();
    for record in records {
        for (key, value) in &record.outputs {
            if value.is_number() && !columns.contains(&key) {
                columns.push(key);
            }
        }
    }
    columns.sort();
    let mut out = columns
        .iter()
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for record in records {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| match record.outputs.get(*c).and_then(|v| v.as_f64()) {
                Some(v) => format!("{v:.16e}"),
                None => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the destination directory so readers
/// never observe a half-written result.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create temporary file in {}", dir.display()))?;
    file.write_all(contents.as_bytes())?;
    file.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
