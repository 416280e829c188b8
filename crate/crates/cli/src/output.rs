//! CSV, metadata sidecar and plot-script emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub description: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: &str, description: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            unit: unit.into(),
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// Result of one verb: a table plus scalar summaries.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, Value>,
}

impl Table {
    pub fn with_columns(columns: Vec<Column>) -> Self {
        Table {
            columns,
            ..Default::default()
        }
    }

    pub fn push_num_row(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(Cell::Num).collect());
    }

    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
    }
}

/// 12 significant digits in scientific notation; `-0` is written as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        format!("{:.11e}", 0.0)
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(t: &Table) -> String {
    let mut out = String::new();
    let header: Vec<String> = t.columns.iter().map(|c| fmt_text(&c.name)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_num(*x),
                Cell::Text(s) => fmt_text(s),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Everything the sidecar records besides the table itself.
pub struct RunInfo<'a> {
    pub verb: &'a str,
    pub run_id: &'a str,
    pub config: Value,
}

pub struct Written {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub plot: Option<PathBuf>,
}

fn plot_script(csv_name: &str) -> String {
    let mut s = String::new();
    s.push_str("import csv\nimport sys\n\nimport matplotlib.pyplot as plt\n\n");
    let _ = writeln!(
        s,
        "path = sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}"
    );
    s.push_str("with open(path, newline=\"\") as f:\n");
    s.push_str("    rows = list(csv.reader(f))\n");
    s.push_str("header, body = rows[0], rows[1:]\n\n\n");
    s.push_str("def num(v):\n    try:\n        return float(v)\n    except ValueError:\n        return None\n\n\n");
    s.push_str("cols = [[num(r[k]) for r in body] for k in range(len(header))]\n");
    s.push_str(
        "numeric = [k for k in range(1, len(header)) if all(v is not None for v in cols[k])]\n",
    );
    s.push_str("if cols and all(v is not None for v in cols[0]):\n");
    s.push_str("    for k in numeric:\n        plt.plot(cols[0], cols[k], label=header[k])\n");
    s.push_str("    plt.xlabel(header[0])\n    plt.legend(fontsize=\"small\")\n");
    let _ = writeln!(
        s,
        "    plt.savefig({:?}, dpi=150)",
        csv_name.replace(".csv", ".png")
    );
    s
}

pub fn write_all(
    dir: &Path,
    info: &RunInfo,
    table: &Table,
    plot: bool,
) -> Result<Written, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let stem = format!("{}-{}", info.verb, info.run_id);
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, render_csv(table)).map_err(io)?;

    let sidecar_value = serde_json::json!({
        "format": "ddrab-run/1",
        "verb": info.verb,
        "run_id": info.run_id,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "csv": format!("{stem}.csv"),
        "number_format": "scientific, 12 significant digits",
        "columns": table.columns,
        "rows": table.rows.len(),
        "summary": table.summary,
        "config": info.config,
    });
    let sidecar = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(&sidecar_value).expect("sidecar serializes");
    text.push('\n');
    std::fs::write(&sidecar, text).map_err(io)?;

    let plot = if plot {
        let p = dir.join(format!("{stem}.py"));
        std::fs::write(&p, plot_script(&format!("{stem}.csv"))).map_err(io)?;
        Some(p)
    } else {
        None
    };
    Ok(Written { csv, sidecar, plot })
}
