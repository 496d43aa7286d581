use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::LabError;
use crate::report::{Cell, Check, Report};

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_name(command: &str) -> String {
    format!("hermite-lab.{command}/{SCHEMA_VERSION}")
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub table: PathBuf,
    pub summary: PathBuf,
}

pub fn write_report(report: &Report, dir: &Path, format: Format) -> Result<Artifacts, LabError> {
    fs::create_dir_all(dir)?;
    let table = dir.join(format!("{}.{}", report.command, format.extension()));
    let summary = dir.join(format!("{}_summary.txt", report.command));
    let mut out = BufWriter::new(File::create(&table)?);
    match format {
        Format::Csv => write_csv(report, &mut out)?,
        Format::Json => write_json(report, &mut out)?,
    }
    out.flush()?;
    fs::write(&summary, report.summary())?;
    Ok(Artifacts { table, summary })
}

/// A `# schema: …` comment line, then a header row and one row per record.
pub fn write_csv<W: Write>(report: &Report, out: &mut W) -> Result<(), LabError> {
    writeln!(out, "# schema: {}", schema_name(report.command))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&report.table.columns)?;
    for row in &report.table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    schema: String,
    command: &'a str,
    columns: &'a [&'static str],
    rows: &'a [Vec<Cell>],
    checks: &'a [Check],
}

pub fn write_json<W: Write>(report: &Report, out: &mut W) -> Result<(), LabError> {
    let doc = JsonDocument {
        schema: schema_name(report.command),
        command: report.command,
        columns: &report.table.columns,
        rows: &report.table.rows,
        checks: &report.checks,
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Table;

    fn sample() -> Report {
        let mut table = Table::new(&["t", "value_re", "value_im", "label"]);
        table.push(vec![0.5.into(), 1e-20.into(), (-2.0).into(), "a,b".into()]);
        table.push(vec![1usize.into(), 0.1.into(), 3.0.into(), "c".into()]);
        Report {
            command: "demo",
            title: "demo run",
            property: "none",
            table,
            notes: vec![],
            checks: vec![Check::at_most("x", 1.0, 2.0)],
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema: hermite-lab.demo/1");
        assert_eq!(lines[1], "t,value_re,value_im,label");
        assert_eq!(lines[2], "0.5,1e-20,-2,\"a,b\"");
        assert_eq!(lines[3], "1,0.1,3,c");
    }

    #[test]
    fn floats_round_trip_through_csv() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, 2.5e-7] {
            let s = Cell::Float(v).render();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], "hermite-lab.demo/1");
        assert_eq!(v["rows"][0][3], "a,b");
        assert_eq!(v["rows"][1][0], 1);
        assert_eq!(v["checks"][0]["pass"], true);
    }
}
