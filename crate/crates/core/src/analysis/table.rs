//! Tabular output shared by all reports.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Number, Value as Json};

use crate::dynamics::integrate::Trajectory;
use crate::error::{Error, Result};
use crate::protocols::sweep::SweepRow;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Float(_) => "float",
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Text(_) => "text",
        }
    }

    fn csv_field(&self) -> String {
        match self {
            Value::Float(v) => format_float(*v),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Result<Json> {
        Ok(match self {
            Value::Float(v) => Json::Number(
                Number::from_f64(*v).ok_or_else(|| Error::Schema(format!("{v} has no JSON representation")))?,
            ),
            Value::Int(v) => Json::from(*v),
            Value::Bool(v) => Json::Bool(*v),
            Value::Text(s) => Json::String(s.clone()),
        })
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}
impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
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

/// Shortest decimal that parses back to the same double; exponent notation
/// for very large or small magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        let mut s = String::new();
        write!(s, "{v}").unwrap();
        s
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row, checking its length and that each column keeps one
    /// value type.
    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Schema(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(first) = self.rows.first() {
            for ((a, b), name) in first.iter().zip(&row).zip(&self.columns) {
                if a.kind() != b.kind() {
                    return Err(Error::Schema(format!(
                        "column {name:?} holds {} values but got {}",
                        a.kind(),
                        b.kind()
                    )));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let mut copy = Table::new(self.columns.iter().cloned());
        for r in &self.rows {
            copy.push(r.clone())?;
        }
        Ok(())
    }
}

/// RFC 4180 CSV with a header row, or a JSON array of objects.
pub fn emit_table(table: &Table, format: Format) -> Result<Vec<u8>> {
    table.check()?;
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Value::csv_field))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Format::Json => {
            let mut out = Vec::with_capacity(table.rows.len());
            for row in &table.rows {
                let mut obj = Map::new();
                for (name, v) in table.columns.iter().zip(row) {
                    obj.insert(name.clone(), v.json()?);
                }
                out.push(Json::Object(obj));
            }
            let mut bytes = serde_json::to_vec_pretty(&Json::Array(out))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Heating sweep in the column layout `t_swap_s, profile, mode, quanta, success`.
pub fn sweep_table(rows: &[SweepRow]) -> Result<Table> {
    let mut t = Table::new(["t_swap_s", "profile", "mode", "quanta", "success"]);
    for r in rows {
        t.push(vec![
            r.t_swap.into(),
            r.profile.label().into(),
            r.mode.label().into(),
            r.result.acquired_quanta.into(),
            r.result.success.into(),
        ])?;
    }
    Ok(t)
}

/// One row per recorded state and ion: `t, ion, x, y, z, vx, vy, vz, E_total`.
pub fn trajectory_table(traj: &Trajectory) -> Result<Table> {
    let mut t = Table::new(["t", "ion", "x", "y", "z", "vx", "vy", "vz", "E_total"]);
    for ((time, state), energy) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        for (i, (p, v)) in state.positions.iter().zip(&state.velocities).enumerate() {
            t.push(vec![
                (*time).into(),
                (i as i64).into(),
                p.x.into(),
                p.y.into(),
                p.z.into(),
                v.x.into(),
                v.y.into(),
                v.z.into(),
                (*energy).into(),
            ])?;
        }
    }
    Ok(t)
}
