//! Deterministic CSV emission and the per-run JSON manifest.
//!
//! Floats are written in Rust's shortest round-trip form, rows in a fixed
//! order, so identical configurations produce byte-identical CSVs whatever
//! the thread count. The manifest carries the resolved parameters (including
//! derived L, L̃, ε) so every data file is self-describing.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A CSV cell; floats go through shortest round-trip formatting.
pub enum Cell {
    Int(i64),
    Uint(u64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Uint(v) => v.to_string(),
            Cell::Float(v) => format!("{v}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Str(v) => v.clone(),
        }
    }
}

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(out.as_bytes())
    }

    /// The same table as an array of row objects.
    pub fn write_json_to(&self, path: &Path) -> std::io::Result<()> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.header.iter().zip(row) {
                    let v = match cell {
                        Cell::Int(x) => serde_json::json!(x),
                        Cell::Uint(x) => serde_json::json!(x),
                        Cell::Float(x) => serde_json::json!(x),
                        Cell::Bool(x) => serde_json::json!(x),
                        Cell::Str(x) => serde_json::json!(x),
                    };
                    obj.insert(name.clone(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let text = serde_json::to_string_pretty(&rows).expect("rows serialize");
        std::fs::write(path, text)
    }
}

/// One named check with its measured value and bound.
#[derive(Serialize, Clone, Debug)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Pass when value ≤ bound.
    pub fn upper(name: &str, value: f64, bound: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    /// Pass when value ≥ bound.
    pub fn lower(name: &str, value: f64, bound: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            value,
            bound,
            pass: value >= bound,
        }
    }

    pub fn boolean(name: &str, pass: bool) -> Self {
        CheckRecord {
            name: name.to_string(),
            value: if pass { 1.0 } else { 0.0 },
            bound: 1.0,
            pass,
        }
    }
}

/// Per-run manifest referencing every data file the run emitted.
#[derive(Serialize, Debug)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub resolved: serde_json::Value,
    pub wall_clock_ms: u128,
    pub checks: Vec<CheckRecord>,
    pub data_files: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, resolved: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            resolved,
            wall_clock_ms: 0,
            checks: Vec::new(),
            data_files: Vec::new(),
        }
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text)
    }
}

/// Emit one run's table + manifest under `dir`: the data as `<name>.csv`
/// (or `<name>.json` for JSON output) plus `<name>_manifest.json`.
pub fn emit(
    dir: &Path,
    name: &str,
    format: crate::config::OutputFormat,
    table: &CsvTable,
    mut manifest: RunManifest,
    started: std::time::Instant,
) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let data_path = match format {
        crate::config::OutputFormat::Csv => {
            let p = dir.join(format!("{name}.csv"));
            table.write_to(&p)?;
            p
        }
        crate::config::OutputFormat::Json => {
            let p = dir.join(format!("{name}.json"));
            table.write_json_to(&p)?;
            p
        }
    };
    manifest.data_files = vec![data_path
        .file_name()
        .expect("data file has a name")
        .to_string_lossy()
        .into_owned()];
    manifest.wall_clock_ms = started.elapsed().as_millis();
    let man_path = dir.join(format!("{name}_manifest.json"));
    manifest.write_to(&man_path)?;
    Ok((data_path, man_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shortest_roundtrip_floats() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![Cell::Float(0.1), Cell::Float(2.0f64.ln())]);
        let dir = std::env::temp_dir().join("maryland-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        t.write_to(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "a,b\n0.1,0.6931471805599453\n");
        // reload is exact
        let v: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 2.0f64.ln());
    }

    #[test]
    fn check_record_directions() {
        assert!(CheckRecord::upper("u", 1.0, 2.0).pass);
        assert!(!CheckRecord::upper("u", 3.0, 2.0).pass);
        assert!(CheckRecord::lower("l", 3.0, 2.0).pass);
    }
}
