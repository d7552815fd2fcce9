//! Output documents: JSON with the resolved config embedded, or CSV with a
//! `#` metadata block ahead of the header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::{json, Map, Value};

use crate::config::{Format, Resolved};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

/// What a command produces, renderable in either format.
#[derive(Debug, Default)]
pub struct Document {
    /// Top-level JSON fields besides `version`, `command` and `config`.
    pub payload: Map<String, Value>,
    /// Extra `# key: value` lines for CSV.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn with_columns(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn field(&mut self, key: &str, value: impl serde::Serialize) {
        self.payload.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.into(), value.to_string()));
    }
}

pub fn render_json(doc: &Document, command: &str, cfg: &Resolved) -> String {
    let mut top = Map::new();
    top.insert("version".into(), json!(VERSION));
    top.insert("command".into(), json!(command));
    top.insert("config".into(), serde_json::to_value(cfg).expect("serializable"));
    for (k, v) in &doc.payload {
        top.insert(k.clone(), v.clone());
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
    s.push('\n');
    s
}

pub fn render_csv(doc: &Document, command: &str, cfg: &Resolved) -> String {
    let mut s = String::new();
    s.push_str(&format!("# qphase {VERSION}\n# command: {command}\n"));
    s.push_str(&format!("# config: {}\n", serde_json::to_string(cfg).expect("serializable")));
    for (k, v) in &doc.meta {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s.push_str(&doc.columns.join(","));
    s.push('\n');
    for row in &doc.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format!("{x:.16e}"),
                Cell::Int(n) => n.to_string(),
                Cell::Empty => String::new(),
            })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn emit(doc: &Document, command: &str, cfg: &Resolved) -> io::Result<()> {
    let text = match cfg.format {
        Format::Json => render_json(doc, command, cfg),
        Format::Csv => render_csv(doc, command, cfg),
    };
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
