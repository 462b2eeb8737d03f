use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map};

use crate::model::SeriesOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    SpaceScan,
    TimeScan,
    /// Single records and ledgers with no scan variable.
    Record,
}

impl ScanAxis {
    fn as_str(self) -> &'static str {
        match self {
            ScanAxis::SpaceScan => "space_scan",
            ScanAxis::TimeScan => "time_scan",
            ScanAxis::Record => "record",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableMetadata {
    pub scenario_hash: String,
    pub series: SeriesOptions,
}

impl TableMetadata {
    fn series_summary(&self) -> String {
        let s = &self.series;
        format!(
            "truncation={} decay_mode={} withdrawal_model={} gradient_mode={} closed_form_acceleration={}",
            s.truncation_n,
            enum_name(&s.decay_mode),
            enum_name(&s.withdrawal_model),
            enum_name(&s.gradient_mode),
            s.closed_form_acceleration
        )
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub axis: ScanAxis,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: TableMetadata,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// `%g`-style rendering with 6 significant digits, independent of locale.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Num(x) => format_sig6(*x),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

fn json_value(v: &Value) -> serde_json::Value {
    match v {
        Value::Num(x) => {
            let rounded: f64 = format_sig6(*x).parse().unwrap_or(*x);
            serde_json::Number::from_f64(rounded).map_or(serde_json::Value::Null, serde_json::Value::Number)
        }
        Value::Bool(b) => json!(b),
        Value::Text(s) => json!(s),
    }
}

impl Table {
    pub fn new(name: &str, axis: ScanAxis, columns: &[&str], metadata: TableMetadata) -> Self {
        Self {
            name: name.to_string(),
            axis,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; non-numeric cells are skipped.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Value::Num(x) => Some(x),
                _ => None,
            })
            .collect()
    }

    /// Two-column projection for external plotting.
    pub fn plot_data(&self, x: &str, y: &str) -> Option<Table> {
        let (ix, iy) = (self.column(x)?, self.column(y)?);
        let mut out = Table::new(
            &format!("{}_{y}_vs_{x}", self.name),
            self.axis,
            &[x, y],
            self.metadata.clone(),
        );
        for r in &self.rows {
            out.push(vec![r[ix].clone(), r[iy].clone()]);
        }
        Some(out)
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("table serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# table: {}", self.name);
        let _ = writeln!(out, "# axis: {}", self.axis.as_str());
        let _ = writeln!(out, "# scenario_hash: {}", self.metadata.scenario_hash);
        let _ = writeln!(out, "# series: {}", self.metadata.series_summary());
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            let fields: Vec<String> = r.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), json_value(v)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        json!({
            "table": self.name,
            "axis": self.axis.as_str(),
            "metadata": {
                "scenario_hash": self.metadata.scenario_hash,
                "series": self.metadata.series,
            },
            "notes": self.notes,
            "rows": rows,
        })
    }
}
