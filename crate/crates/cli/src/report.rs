use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => render_float(*v),
            Cell::Text(v) => v.clone(),
        }
    }
}

/// Shortest round-trip representation; scientific notation outside
/// `[1e-4, 1e15)`.
pub fn render_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A named quantitative check: `value` compared against `bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("<= {limit:e}"),
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!(">= {limit}"),
            pass: value >= limit,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            pass: (lo..=hi).contains(&value),
        }
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("{target} ± {tol}"),
            pass: (value - target).abs() <= tol,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} (expected {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            render_float(self.value),
            self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub title: &'static str,
    /// The mathematical statement the run exercises.
    pub property: &'static str,
    pub table: Table,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "hermite-lab {}: {}", self.command, self.title);
        let _ = writeln!(s);
        let _ = writeln!(s, "Property: {}", self.property);
        let _ = writeln!(s, "Rows written: {}", self.table.rows.len());
        if !self.notes.is_empty() {
            let _ = writeln!(s);
            for note in &self.notes {
                let _ = writeln!(s, "{note}");
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "Checks:");
        for c in &self.checks {
            let _ = writeln!(s, "  {}", c.line());
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s);
        let _ = writeln!(s, "{passed}/{} checks passed", self.checks.len());
        s
    }
}
