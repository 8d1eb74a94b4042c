//! Result tables and their CSV serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Column-named rows of reals with a metadata block.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    metadata: Vec<(String, String)>,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    timestamp: u64,
    plot: PlotLayout,
}

/// What the generated plot script draws.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct PlotLayout {
    pub x: String,
    pub y: Vec<String>,
    /// Columns whose distinct value combinations become separate curves.
    pub group: Vec<String>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        ResultTable {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
            timestamp: 0,
            plot: PlotLayout::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidInput(format!(
                "row has {} entries, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn add_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub(crate) fn set_timestamp(&mut self, timestamp: u64) {
        self.timestamp = timestamp;
    }

    pub(crate) fn set_plot(&mut self, plot: PlotLayout) {
        self.plot = plot;
    }

    pub(crate) fn prepend_meta(&mut self, entries: Vec<(String, String)>) {
        self.metadata.splice(0..0, entries);
    }

    /// `# key: value` header lines, the timestamp, a header row and data rows
    /// with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
        }
        let _ = writeln!(out, "# timestamp: {}", self.timestamp);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_real(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// gnuplot script drawing the table from `csv_name`.
    pub fn plot_script(&self, csv_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# gnuplot script for {csv_name}");
        out.push_str("set datafile separator ','\n");
        out.push_str("set datafile commentschars '#'\n");
        out.push_str("set key autotitle columnhead\n");
        let _ = writeln!(out, "set title '{}'", self.name);
        let _ = writeln!(out, "set xlabel '{}'", self.plot.x);
        let _ = writeln!(out, "file = '{csv_name}'");
        let group_cols: Vec<Vec<f64>> = self.plot.group.iter().filter_map(|g| self.column(g)).collect();
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for r in 0..self.rows.len() {
            let key: Vec<f64> = group_cols.iter().map(|c| c[r]).collect();
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        let mut clauses = Vec::new();
        for y in &self.plot.y {
            for key in &groups {
                let x = if key.is_empty() {
                    format!("(column('{}'))", self.plot.x)
                } else {
                    let cond: Vec<String> = self
                        .plot
                        .group
                        .iter()
                        .zip(key)
                        .map(|(col, v)| format!("column('{col}') == {v}"))
                        .collect();
                    format!("({} ? column('{}') : 1/0)", cond.join(" && "), self.plot.x)
                };
                let labels: Vec<String> =
                    self.plot.group.iter().zip(key).map(|(col, v)| format!("{col} = {v}")).collect();
                let title = if labels.is_empty() { y.clone() } else { format!("{y}, {}", labels.join(", ")) };
                clauses.push(format!("file using {x}:(column('{y}')) with lines title '{title}'"));
            }
        }
        if clauses.is_empty() {
            return out;
        }
        out.push_str("plot ");
        out.push_str(&clauses.join(", \\\n     "));
        out.push('\n');
        out
    }
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub(crate) fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Paths written by [`write_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub plot_script: PathBuf,
}

/// Writes the CSV to `path` and a gnuplot script next to it (same stem,
/// extension `.gp`). An empty table is refused.
pub fn write_results(table: &ResultTable, path: &Path) -> Result<WrittenFiles> {
    if table.is_empty() {
        return Err(Error::InvalidInput(format!("refusing to write an empty table to {}", path.display())));
    }
    let plot_script = path.with_extension("gp");
    let csv_name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))?;
    fs::write(&plot_script, table.plot_script(&csv_name)).map_err(|e| Error::io(&plot_script, e))?;
    Ok(WrittenFiles { csv: path.to_path_buf(), plot_script })
}
