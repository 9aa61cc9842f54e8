//! Trajectory CSV files.
//!
//! Every value is written with 17 significant digits, which is enough for
//! an `f64` to survive a text round trip exactly; reading a file and
//! writing it again reproduces it byte for byte.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use er3bp_core::dynamics::{extended_hamiltonian, hamiltonian};
use er3bp_core::synthesis::AnalyticSample;
use er3bp_core::{ExtendedState, SystemParams};

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 9] = ["f", "X", "Y", "Z", "Xp", "Yp", "Zp", "F", "Hext"];
pub const SOURCE_COLUMN: &str = "source";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Integrated,
    Refined,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Analytic => "analytic",
            Source::Integrated => "integrated",
            Source::Refined => "refined",
        })
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(Source::Analytic),
            "integrated" => Ok(Source::Integrated),
            "refined" => Ok(Source::Refined),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub f: f64,
    /// `X, Y, Z, X', Y', Z'`.
    pub state: [f64; 6],
    pub dummy_action: f64,
    pub hext: f64,
    pub source: Option<Source>,
}

/// 17 significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl Row {
    pub fn from_extended(s: &ExtendedState, params: &SystemParams, source: Option<Source>) -> CliResult<Self> {
        Ok(Self {
            f: s.state.f,
            state: s.state.to_array(),
            dummy_action: s.dummy_action,
            hext: extended_hamiltonian(s, params)?,
            source,
        })
    }

    /// Analytic samples carry no dummy action; `F = 0` and `Hext = H`.
    pub fn from_analytic(sample: &AnalyticSample, params: &SystemParams) -> CliResult<Self> {
        let state = sample.state();
        Ok(Self {
            f: sample.f,
            state: state.to_array(),
            dummy_action: 0.0,
            hext: hamiltonian(&state, params)?,
            source: Some(Source::Analytic),
        })
    }

    fn fields(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(10);
        out.push(format_value(self.f));
        out.extend(self.state.iter().map(|&v| format_value(v)));
        out.push(format_value(self.dummy_action));
        out.push(format_value(self.hext));
        if let Some(source) = self.source {
            out.push(source.to_string());
        }
        out
    }
}

/// Writes `rows`; the `source` column is present when the first row has one,
/// and then every row must.
pub fn write_rows<W: Write>(writer: W, rows: &[Row]) -> CliResult<()> {
    let with_source = rows.first().is_some_and(|r| r.source.is_some());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    if with_source {
        w.write_record(HEADER.iter().chain(std::iter::once(&SOURCE_COLUMN)))?;
    } else {
        w.write_record(HEADER)?;
    }
    for (i, row) in rows.iter().enumerate() {
        if row.source.is_some() != with_source {
            return Err(CliError::CsvShape { row: i + 1, message: "source column present on some rows only".into() });
        }
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> CliResult<Vec<Row>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let with_source = match names.as_slice() {
        n if n == HEADER => false,
        [head @ .., last] if head == HEADER && *last == SOURCE_COLUMN => true,
        _ => return Err(CliError::CsvShape { row: 0, message: format!("unexpected header {names:?}") }),
    };
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let number = |k: usize| -> CliResult<f64> {
            record[k]
                .parse()
                .map_err(|_| CliError::CsvShape { row: i + 1, message: format!("bad number {:?}", &record[k]) })
        };
        let mut state = [0.0; 6];
        for (k, slot) in state.iter_mut().enumerate() {
            *slot = number(k + 1)?;
        }
        let source = if with_source {
            Some(record[9].parse().map_err(|message| CliError::CsvShape { row: i + 1, message })?)
        } else {
            None
        };
        rows.push(Row { f: number(0)?, state, dummy_action: number(7)?, hext: number(8)?, source });
    }
    Ok(rows)
}
