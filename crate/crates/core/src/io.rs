//! Plain-text tables: `#`-prefixed metadata lines, a header row, then
//! comma-separated rows with LF line endings.

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, round-trip exact for `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let v = self
            .meta_value(key)
            .ok_or_else(|| Error::Parse(format!("missing header field `{key}`")))?;
        v.parse()
            .map_err(|_| Error::Parse(format!("header field `{key}` = `{v}` is not a number")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[idx].parse().map_err(|_| {
                    Error::Parse(format!("row {}: `{}` is not a number", i + 1, row[idx]))
                })
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Table::default();
        let mut have_header = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("line {}: malformed header", lineno + 1)))?;
                table.meta.push((k.trim().to_string(), v.trim().to_string()));
            } else if line.trim().is_empty() {
                continue;
            } else if !have_header {
                table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                have_header = true;
            } else {
                let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                if row.len() != table.columns.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        table.columns.len(),
                        row.len()
                    )));
                }
                table.rows.push(row);
            }
        }
        if !have_header {
            return Err(Error::Parse("missing column header".into()));
        }
        Ok(table)
    }
}
