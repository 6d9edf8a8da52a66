//! Tabular output as CSV or JSON.
//!
//! Numbers are rendered once, in scientific notation at the configured number
//! of significant digits; JSON carries the value of that rendered text, so
//! both formats encode the same numbers.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const DEFAULT_PRECISION: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputEnvelope {
    pub format: Format,
    precision: usize,
}

impl OutputEnvelope {
    pub fn new(format: Format, precision: usize) -> Result<Self> {
        if !(6..=17).contains(&precision) {
            return Err(Error::InvalidSweep(format!("precision must be in [6, 17], got {precision}")));
        }
        Ok(Self { format, precision })
    }

    pub fn precision(&self) -> usize {
        self.precision
    }
}

impl Default for OutputEnvelope {
    fn default() -> Self {
        Self { format: Format::Csv, precision: DEFAULT_PRECISION }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
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

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `key=value` annotations (CSV comment lines, JSON meta keys).
    pub notes: Vec<(String, i64)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: i64) {
        self.notes.push((key.to_string(), value));
    }
}

/// Scientific notation with `precision` significant digits.
pub fn format_number(x: f64, precision: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", precision - 1, x)
    } else {
        x.to_string()
    }
}

fn render_cell(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Num(x) => format_number(*x, precision),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(cell: &Cell, precision: usize) -> Value {
    match cell {
        Cell::Num(x) => format_number(*x, precision)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Empty => Value::Null,
    }
}

pub fn write_csv(table: &Table, precision: usize, w: &mut dyn Write) -> Result<()> {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| render_cell(c, precision)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for (k, v) in &table.notes {
        out.push_str(&format!("# {k}={v}\n"));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// `{"meta": {...}, "rows": [...]}`; table notes are merged into `meta`.
pub fn write_json(table: &Table, meta: Map<String, Value>, precision: usize, w: &mut dyn Write) -> Result<()> {
    let mut meta = meta;
    for (k, v) in &table.notes {
        meta.insert(k.clone(), json!(v));
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            Value::Object(
                table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.clone(), json_cell(cell, precision)))
                    .collect(),
            )
        })
        .collect();
    let doc = json!({ "meta": Value::Object(meta), "rows": rows });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    w.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_table(table: &Table, meta: Map<String, Value>, envelope: &OutputEnvelope, w: &mut dyn Write) -> Result<()> {
    match envelope.format {
        Format::Csv => write_csv(table, envelope.precision, w),
        Format::Json => write_json(table, meta, envelope.precision, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Table {
        let mut t = Table::new(&["a", "b", "label"]);
        t.push(vec![Cell::Num(2.0), Cell::Empty, "x".into()]);
        t.push(vec![Cell::Num(-1.0 / 3.0), Cell::Num(6.02e23), "y".into()]);
        t
    }

    #[test]
    fn scientific_rendering() {
        assert_eq!(format_number(2.0, 17), "2.0000000000000000e0");
        assert_eq!(format_number(-0.00125, 6), "-1.25000e-3");
        assert_eq!(format_number(f64::NAN, 6), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let mut t = sample();
        t.note("dropped_rows", 3);
        write_csv(&t, 6, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,label\n2.00000e0,,x\n-3.33333e-1,6.02000e23,y\n# dropped_rows=3\n"
        );
    }

    #[test]
    fn text_with_separators_is_quoted() {
        let mut t = Table::new(&["s"]);
        t.push(vec!["a,b \"c\"".into()]);
        let mut buf = Vec::new();
        write_csv(&t, 6, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s\n\"a,b \"\"c\"\"\"\n");
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        let mut meta = Map::new();
        meta.insert("command".into(), json!("test"));
        write_json(&sample(), meta, 17, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["meta"]["command"], "test");
        assert_eq!(v["rows"][0]["a"], 2.0);
        assert_eq!(v["rows"][0]["b"], Value::Null);
        assert_eq!(v["rows"][1]["label"], "y");
    }

    #[test]
    fn precision_bounds() {
        assert!(OutputEnvelope::new(Format::Csv, 5).is_err());
        assert!(OutputEnvelope::new(Format::Json, 18).is_err());
        assert_eq!(OutputEnvelope::new(Format::Csv, 6).unwrap().precision(), 6);
    }

    proptest! {
        #[test]
        fn full_precision_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_number(x, 17).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn csv_and_json_agree(x in -1e300..1e300f64, p in 6usize..=17) {
            let mut t = Table::new(&["v"]);
            t.push(vec![Cell::Num(x)]);
            let mut csv = Vec::new();
            write_csv(&t, p, &mut csv).unwrap();
            let mut js = Vec::new();
            write_json(&t, Map::new(), p, &mut js).unwrap();
            let from_csv: f64 = String::from_utf8(csv).unwrap().lines().nth(1).unwrap().parse().unwrap();
            let v: Value = serde_json::from_slice(&js).unwrap();
            prop_assert_eq!(from_csv, v["rows"][0]["v"].as_f64().unwrap());
        }
    }
}
