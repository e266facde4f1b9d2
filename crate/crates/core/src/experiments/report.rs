use std::fmt::Write as _;

use crate::error::{Result, SannError};

use super::ExperimentId;

/// Number of significant digits kept in report cells.
pub const SIGNIFICANT_DIGITS: usize = 10;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
///
/// Report cells are stored already rounded, so the CSV holds exactly what the
/// verdicts were computed from.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().expect("formatted float")
}

/// Formats a cell value: integers without a fraction, other values in scientific
/// notation with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    /// Human-readable pass condition, e.g. `>= 0.9`.
    pub criterion: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, measured: f64, criterion: impl Into<String>) -> Self {
        Self {
            name: name.to_owned(),
            passed,
            measured,
            criterion: criterion.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    /// Echo of the configuration that produced the report.
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(String, f64)>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn new(id: ExperimentId, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            id,
            config,
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    /// Appends a row, rounding every cell to the CSV precision.
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(SannError::Shape(format!(
                "row of {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SannError::Domain("report cells must be finite".into()));
        }
        self.rows.push(row.into_iter().map(round_sig).collect());
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| SannError::Config(format!("report has no column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_cell(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the rows back from [`ExperimentReport::to_csv`] output.
    pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut lines = text.lines();
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| SannError::Parse("empty CSV".into()))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let rows = lines
            .map(|line| {
                line.split(',')
                    .map(|c| c.parse::<f64>().map_err(|e| SannError::Parse(format!("cell {c:?}: {e}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.iter().any(|r| r.len() != columns.len()) {
            return Err(SannError::Parse("ragged CSV".into()));
        }
        Ok((columns, rows))
    }

    /// Sidecar text: config echo and summary as `#` lines, then one
    /// `PASS|FAIL <name> measured=<v> (<criterion>)` line per verdict.
    pub fn verdict_text(&self) -> String {
        let mut out = format!("# experiment {}\n", self.id);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary {k} = {}", format_cell(round_sig(*v)));
        }
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{} {} measured={} ({})",
                if v.passed { "PASS" } else { "FAIL" },
                v.name,
                format_cell(round_sig(v.measured)),
                v.criterion
            );
        }
        out
    }
}
