//! Text output helpers. Floats in line-oriented formats are printed with
//! `{:.16e}` (17 significant digits), enough to reproduce the exact bits.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use nsopt::QueryLedger;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_vector(v: &nsopt::Vector) -> String {
    v.iter()
        .map(|c| fmt_f64(*c))
        .collect::<Vec<_>>()
        .join(" ")
}

pub const CSV_HEADER: &str =
    "instance,algo,delta,eps,seed,oracle_calls,success,final_norm,wall_time_ms";

/// One measurement row. `instance` is the descriptor, re-parseable as input.
#[derive(Clone, Debug)]
pub struct CsvRow {
    pub instance: String,
    pub algo: String,
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    pub oracle_calls: usize,
    pub success: bool,
    pub final_norm: f64,
    pub wall_time_ms: u128,
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.algo,
            self.delta,
            self.eps,
            self.seed,
            self.oracle_calls,
            self.success,
            fmt_f64(self.final_norm),
            self.wall_time_ms
        )
    }
}

/// Appends a row, writing the header first when the file is new or empty.
pub fn append_csv(path: &Path, row: &CsvRow) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = BufWriter::new(file);
    if fresh {
        writeln!(w, "{CSV_HEADER}")?;
    }
    writeln!(w, "{}", row.to_line())?;
    Ok(())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    t: usize,
    x: &'a [f64],
    f: f64,
    g: &'a [f64],
    event: &'a str,
}

/// Writes the query transcript as JSON lines, one oracle call per line in
/// call order, tagged with the algorithm phase that issued it.
pub fn write_trace_jsonl(path: &Path, ledger: &QueryLedger) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for (t, rec) in ledger.records().iter().enumerate() {
        let line = TraceLine {
            t,
            x: &rec.x.0,
            f: rec.reply.value,
            g: &rec.reply.subgrad.0,
            event: rec.tag,
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nsopt::instances::Quadratic;
    use nsopt::{Oracle, Vector};

    #[test]
    fn float_format_survives_reparsing() {
        for x in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), -1e-300, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_rows_append_under_one_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let row = CsvRow {
            instance: "abs".into(),
            algo: "ingd-det".into(),
            delta: 0.5,
            eps: 0.25,
            seed: 0,
            oracle_calls: 12,
            success: true,
            final_norm: 0.0,
            wall_time_ms: 0,
        };
        append_csv(&path, &row).unwrap();
        append_csv(&path, &row).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], lines[2]);
        assert!(lines[1].starts_with("abs,ingd-det,0.5,0.25,0,12,true,"));
    }

    #[test]
    fn trace_lines_mirror_the_ledger() {
        let oracle = Quadratic::new(2);
        let mut ledger = QueryLedger::unbounded();
        ledger
            .query(&oracle, &Vector(vec![1.0, 2.0]), "outer-init")
            .unwrap();
        ledger
            .query(&oracle, &Vector(vec![0.0, 0.5]), "probe")
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        write_trace_jsonl(&path, &ledger).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0]["t"], 0);
        assert_eq!(lines[0]["event"], "outer-init");
        assert_eq!(lines[0]["x"][1], 2.0);
        assert_eq!(lines[1]["f"], oracle.eval(&Vector(vec![0.0, 0.5])).value);
    }
}
