//! Tabular experiment reports and their CSV/JSON serialization.

use std::fmt;
use std::io::Write;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{LabError, Result};

/// A single report cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
    Null,
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Float(v) => write!(f, "{v:?}"),
            Scalar::Text(s) => f.write_str(s),
            Scalar::Null => Ok(()),
        }
    }
}

macro_rules! scalar_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Scalar {
            fn from(v: $t) -> Self { Scalar::Int(v as i64) }
        }
    )*};
}
scalar_from_int!(i32, i64, u32, u64, usize);

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Text(v.to_string())
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Text(v.to_owned())
    }
}

impl From<String> for Scalar {
    fn from(v: String) -> Self {
        Scalar::Text(v)
    }
}

impl<T: Into<Scalar>> From<Option<T>> for Scalar {
    fn from(v: Option<T>) -> Self {
        v.map_or(Scalar::Null, Into::into)
    }
}

/// One flat record of a report; column order is insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Row(pub IndexMap<String, Scalar>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Scalar>) -> Self {
        self.0.insert(key.to_owned(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&Scalar> {
        self.0.get(key)
    }

    /// The cell as a float (integers widen); `None` for text and nulls.
    pub fn float(&self, key: &str) -> Option<f64> {
        match self.0.get(key)? {
            Scalar::Float(v) => Some(*v),
            Scalar::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.0.get(key)? {
            Scalar::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Seed and tolerance snapshot attached to every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: IndexMap<String, Scalar>,
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.to_owned(),
            params: IndexMap::new(),
            rows: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Scalar>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Values of a float column, in row order (non-numeric cells skipped).
    pub fn column(&self, key: &str) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.float(key)).collect()
    }

    /// Rows are nonempty, share one column set and hold only finite floats.
    pub fn validate(&self) -> Result<()> {
        let first = self
            .rows
            .first()
            .ok_or_else(|| LabError::Invariant(format!("report {} has no rows", self.name)))?;
        let header: Vec<&str> = first.keys().collect();
        for (i, row) in self.rows.iter().enumerate() {
            if !row.keys().eq(header.iter().copied()) {
                return Err(LabError::Invariant(format!("row {i} has different columns")));
            }
            for (k, v) in &row.0 {
                if let Scalar::Float(x) = v {
                    if !x.is_finite() {
                        return Err(LabError::Invariant(format!("row {i} column {k} is {x}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = CsvRowWriter::new(out);
        for row in &self.rows {
            w.row(row)?;
        }
        w.finish()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Receives rows as soon as they are produced.
pub trait RowSink {
    fn row(&mut self, row: &Row) -> Result<()>;
}

/// Discards rows.
pub struct NoSink;

impl RowSink for NoSink {
    fn row(&mut self, _row: &Row) -> Result<()> {
        Ok(())
    }
}

/// Writes CSV row by row, flushing after each so a partial file stays valid.
pub struct CsvRowWriter<W: Write> {
    inner: csv::Writer<W>,
    header: Option<Vec<String>>,
}

impl<W: Write> CsvRowWriter<W> {
    pub fn new(out: W) -> Self {
        CsvRowWriter {
            inner: csv::WriterBuilder::new().has_headers(false).from_writer(out),
            header: None,
        }
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

impl<W: Write> RowSink for CsvRowWriter<W> {
    fn row(&mut self, row: &Row) -> Result<()> {
        match &self.header {
            None => {
                let header: Vec<String> = row.keys().map(str::to_owned).collect();
                self.inner.write_record(&header)?;
                self.header = Some(header);
            }
            Some(h) => {
                if !row.keys().eq(h.iter().map(String::as_str)) {
                    return Err(LabError::Invariant("row columns differ from CSV header".into()));
                }
            }
        }
        self.inner.write_record(row.0.values().map(|v| v.to_string()))?;
        self.inner.flush()?;
        Ok(())
    }
}

/// Accumulates rows into a report while forwarding them to a sink.
pub(crate) struct Recorder<'a> {
    pub report: ExperimentReport,
    sink: &'a mut dyn RowSink,
}

impl<'a> Recorder<'a> {
    pub fn new(report: ExperimentReport, sink: &'a mut dyn RowSink) -> Self {
        Recorder { report, sink }
    }

    pub fn push(&mut self, row: Row) -> Result<()> {
        self.sink.row(&row)?;
        self.report.rows.push(row);
        Ok(())
    }

    pub fn finish(self) -> Result<ExperimentReport> {
        self.report.validate()?;
        Ok(self.report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo").param("n", 3u64);
        r.rows.push(Row::new().with("n", 1u64).with("x", 0.1).with("note", "a,b"));
        r.rows.push(Row::new().with("n", 2u64).with("x", 1e-20).with("note", None::<f64>));
        r
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(csv, "n,x,note\n1,0.1,\"a,b\"\n2,1e-20,\n");
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: ExperimentReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn validation() {
        assert!(sample().validate().is_ok());
        let mut r = sample();
        r.rows.push(Row::new().with("n", 3u64).with("x", f64::NAN).with("note", ""));
        assert!(r.validate().is_err());
        let mut r = sample();
        r.rows.push(Row::new().with("n", 3u64));
        assert!(r.validate().is_err());
        assert!(ExperimentReport::new("empty").validate().is_err());
    }
}
