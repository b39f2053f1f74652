use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            other => Err(CliError::UnknownFormat(other.to_string())),
        }
    }
}

/// Which side of a row's claim is attained. Rows with a single bound use
/// `No`/`Yes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equality {
    No,
    Yes,
    Lower,
    Upper,
    Both,
}

impl Equality {
    pub fn single(hit: bool) -> Self {
        if hit {
            Equality::Yes
        } else {
            Equality::No
        }
    }

    pub fn sides(lower: bool, upper: bool) -> Self {
        match (lower, upper) {
            (false, false) => Equality::No,
            (true, false) => Equality::Lower,
            (false, true) => Equality::Upper,
            (true, true) => Equality::Both,
        }
    }

    pub fn any(self) -> bool {
        self != Equality::No
    }
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equality::No => "false",
            Equality::Yes => "true",
            Equality::Lower => "lower",
            Equality::Upper => "upper",
            Equality::Both => "both",
        })
    }
}

/// One evaluated claim `lower ≤ middle ≤ upper`, either bound possibly
/// absent. Numbers are kept in their rendered form: `p/q` for exact values,
/// shortest round-trip decimal for floating ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check: String,
    pub inputs: String,
    pub lower: Option<String>,
    pub middle: Option<String>,
    pub upper: Option<String>,
    pub holds: bool,
    pub equality: Equality,
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Row {
    pub fn failed(check: &str, inputs: String, regime: &str, error: String) -> Self {
        Row {
            check: check.to_string(),
            inputs,
            lower: None,
            middle: None,
            upper: None,
            holds: false,
            equality: Equality::No,
            regime: regime.to_string(),
            error: Some(error),
        }
    }

    fn cells(&self) -> [String; 8] {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let (inputs, holds, equality) = match &self.error {
            Some(e) => (format!("{} error={e}", self.inputs), "error".to_string(), String::new()),
            None => (self.inputs.clone(), self.holds.to_string(), self.equality.to_string()),
        };
        [
            self.check.clone(),
            inputs,
            opt(&self.lower),
            opt(&self.middle),
            opt(&self.upper),
            holds,
            equality,
            self.regime.clone(),
        ]
    }
}

pub const HEADER: [&str; 8] = ["check", "inputs", "lower", "middle", "upper", "holds", "equality", "regime"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(rows: Vec<Row>) -> Self {
        Report { rows }
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    /// 0 when every claim holds, 1 on any violation, 2 on any row-level
    /// input error.
    pub fn exit_code(&self) -> i32 {
        if self.has_errors() {
            2
        } else if self.all_hold() {
            0
        } else {
            1
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn render_report(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(HEADER)?;
            for row in &report.rows {
                w.write_record(row.cells())?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Table => Ok(table(report).into_bytes()),
    }
}

fn table(report: &Report) -> String {
    let cells: Vec<[String; 8]> = report.rows.iter().map(Row::cells).collect();
    let mut widths = HEADER.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &mut dyn Iterator<Item = &str>| {
        let padded: Vec<String> = fields.zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut HEADER.iter().copied());
    for row in &cells {
        line(&mut row.iter().map(String::as_str));
    }
    out
}
