//! Machine-readable run reports.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::Result;

/// One pass/fail comparison of measured values against a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub values: Vec<f64>,
    pub bound: f64,
    /// Distance to failure: positive when passing.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn upper(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = bound - value;
        Check {
            name: name.into(),
            values: vec![value],
            bound,
            margin,
            pass: margin >= 0.0,
        }
    }

    /// Passes when `value >= bound`.
    pub fn lower(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = value - bound;
        Check {
            name: name.into(),
            values: vec![value],
            bound,
            margin,
            pass: margin >= 0.0,
        }
    }

    /// Passes when `|value - target| <= tol`; `values` holds `[value, target]`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let margin = tol - (value - target).abs();
        Check {
            name: name.into(),
            values: vec![value, target],
            bound: tol,
            margin,
            pass: margin >= 0.0,
        }
    }

    /// Boolean outcome with no numeric content.
    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            values: Vec::new(),
            bound: 0.0,
            margin: if pass { 0.0 } else { -1.0 },
            pass,
        }
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = values;
        self
    }
}

/// A named table of numeric rows for plotting; the first column is the abscissa.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Series {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// Column `name`, if present.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    /// File name to hex SHA-256.
    pub input_digests: BTreeMap<String, String>,
    /// Command-specific scalar outputs.
    pub summary: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            version: crate::VERSION.to_string(),
            ..Default::default()
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Pretty JSON with every float printed to 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_json(&mut buf, self)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }
}

/// Serialize `value` as indented JSON with round-trip-exact floats.
/// Non-finite floats become `null`.
pub fn write_json<W: Write, T: Serialize + ?Sized>(w: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(w, ExactFloats::default());
    value
        .serialize(&mut ser)
        .map_err(|e| crate::Error::Parse(e.to_string()))
}

#[derive(Default)]
struct ExactFloats {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
