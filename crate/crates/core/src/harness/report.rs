//! Reports, verdicts and their CSV/JSON serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Bumped whenever a table layout or report field changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Quadrature quality was insufficient to decide.
    Flagged,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Flagged => "FLAGGED",
            Verdict::Fail => "FAIL",
        })
    }
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// A failure on flagged numerics is inconclusive.
    pub fn judged(ok: bool, flagged: bool) -> Self {
        match (ok, flagged) {
            (true, _) => Verdict::Pass,
            (false, true) => Verdict::Flagged,
            (false, false) => Verdict::Fail,
        }
    }

    pub fn exit_code(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
        match verdicts.into_iter().max() {
            Some(Verdict::Fail) => 1,
            Some(Verdict::Flagged) => 3,
            _ => 0,
        }
    }
}

/// Table cell. Non-finite numbers are stored as missing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(Option<f64>),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(Some(x)) if x.fract() == 0.0 && x.abs() < 1e15 => format!("{}", *x as i64),
            Cell::Num(Some(x)) => format!("{x:?}"),
            Cell::Num(None) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x.is_finite().then_some(x))
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.filter(|v| v.is_finite()))
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(Some(x as f64))
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Inverse of [`Table::to_csv`]: numeric-looking fields become numbers and
    /// empty fields become missing numbers.
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = vec![];
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(
                rec.iter()
                    .map(|s| match s {
                        "" => Cell::Num(None),
                        _ => s.parse::<f64>().map(|x| Cell::Num(Some(x))).unwrap_or_else(|_| Cell::Text(s.into())),
                    })
                    .collect(),
            );
        }
        Ok(Table { name: name.into(), columns, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// One acceptance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance criterion number; `None` for auxiliary diagnostics.
    pub criterion: Option<u32>,
    pub name: String,
    pub value: Option<f64>,
    /// Human-readable pass condition.
    pub condition: String,
    pub verdict: Verdict,
}

impl Check {
    pub fn new(criterion: Option<u32>, name: &str, value: f64, condition: &str, verdict: Verdict) -> Self {
        Check {
            criterion,
            name: name.into(),
            value: value.is_finite().then_some(value),
            condition: condition.into(),
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub subcommand: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Seconds per section. The only field allowed to differ between reruns.
    pub wall_clock: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn new(subcommand: &str, config: ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config,
            checks: vec![],
            tables: vec![],
            wall_clock: BTreeMap::new(),
        }
    }

    pub fn verdicts_table(&self) -> Table {
        let mut t = Table::new("verdicts", &["criterion", "name", "value", "condition", "verdict"]);
        for c in &self.checks {
            t.push(vec![
                c.criterion.map(f64::from).into(),
                c.name.as_str().into(),
                c.value.into(),
                c.condition.as_str().into(),
                c.verdict.to_string().into(),
            ]);
        }
        t
    }

    /// Worst verdict per criterion, in criterion order.
    pub fn criterion_verdicts(&self) -> BTreeMap<u32, Verdict> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            if let Some(n) = c.criterion {
                let v = out.entry(n).or_insert(Verdict::Pass);
                *v = (*v).max(c.verdict);
            }
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        Verdict::exit_code(self.checks.iter().map(|c| c.verdict))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `report.json`, `verdicts.csv` and one CSV per table into `dir`.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = vec![];
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("report.json".into(), self.to_json()?)?;
        put("verdicts.csv".into(), self.verdicts_table().to_csv()?)?;
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv()?)?;
        }
        Ok(written)
    }
}
