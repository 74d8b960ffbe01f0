//! CSV, JSON and plot-script output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{BenchReport, ValidationReport};

/// JSON schema of a serialized [`ValidationReport`].
pub const VALIDATION_SCHEMA: &str = include_str!("../schema/validation_report.schema.json");

/// Where output goes: a file, or standard output for `-`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn parse(s: &str) -> Self {
        if s == "-" {
            Sink::Stdout
        } else {
            Sink::File(PathBuf::from(s))
        }
    }

    fn path(&self) -> PathBuf {
        match self {
            Sink::Stdout => PathBuf::from("<stdout>"),
            Sink::File(p) => p.clone(),
        }
    }

    fn open(&self) -> Result<Box<dyn Write>> {
        match self {
            Sink::Stdout => Ok(Box::new(io::stdout().lock())),
            Sink::File(p) => {
                let f = File::create(p).map_err(|source| Error::Io { path: p.clone(), source })?;
                Ok(Box::new(BufWriter::new(f)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Write a header and rows of numbers as CSV.
pub fn write_matrix_csv(sink: &Sink, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let path = sink.path();
    let csv_err = |source| Error::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_writer(sink.open()?);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.clone(), source })
}

/// Paths as CSV with a leading time column: `t,path_0,path_1,...`.
pub fn write_paths_csv(sink: &Sink, times: &[f64], paths: &[Vec<f64>]) -> Result<()> {
    let header = path_header(paths.len());
    let rows: Vec<Vec<f64>> = times
        .iter()
        .enumerate()
        .map(|(j, &t)| std::iter::once(t).chain(paths.iter().map(|p| p[j])).collect())
        .collect();
    write_matrix_csv(sink, &header, &rows)
}

pub fn path_header(n_paths: usize) -> Vec<String> {
    std::iter::once("t".to_string()).chain((0..n_paths).map(|i| format!("path_{i}"))).collect()
}

/// Read back a numeric CSV written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Config(format!("{}: bad number '{f}': {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(sink: &Sink, value: &T) -> Result<()> {
    let path = sink.path();
    let mut w = sink.open()?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json { path: path.clone(), source })?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| Error::Io { path, source })
}

pub fn write_validation(sink: &Sink, report: &ValidationReport, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(sink, report),
        Format::Csv => {
            let path = sink.path();
            let csv_err = |source| Error::Csv { path: path.clone(), source };
            let mut w = csv::Writer::from_writer(sink.open()?);
            w.write_record([
                "target", "method", "n", "seed", "build_id", "order", "statistic", "truth", "estimate", "std_error",
                "err_pct", "absolute_fallback", "tolerance", "pass",
            ])
            .map_err(csv_err)?;
            for r in &report.records {
                let stat = match r.statistic {
                    crate::report::Statistic::Moment => "moment",
                    crate::report::Statistic::Cumulant => "cumulant",
                };
                w.write_record([
                    report.target.clone(),
                    report.method.clone(),
                    report.n.to_string(),
                    report.seed.to_string(),
                    report.build_id.clone(),
                    r.order.to_string(),
                    stat.to_string(),
                    fmt_f64(r.truth),
                    fmt_f64(r.estimate),
                    fmt_f64(r.std_error),
                    fmt_f64(r.err_pct),
                    r.absolute_fallback.to_string(),
                    fmt_f64(r.tolerance),
                    r.pass.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(|source| Error::Io { path: path.clone(), source })
        }
    }
}

pub fn write_bench(sink: &Sink, report: &BenchReport, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(sink, report),
        Format::Csv => {
            let path = sink.path();
            let csv_err = |source| Error::Csv { path: path.clone(), source };
            let mut w = csv::Writer::from_writer(sink.open()?);
            w.write_record(["target", "method", "n", "seconds", "factor", "baseline", "repetitions", "seed", "machine", "build_id"])
                .map_err(csv_err)?;
            for r in &report.rows {
                w.write_record([
                    report.target.clone(),
                    r.method.clone(),
                    r.n.to_string(),
                    fmt_f64(r.seconds),
                    fmt_f64(r.factor),
                    report.baseline.clone(),
                    report.repetitions.to_string(),
                    report.seed.to_string(),
                    report.machine.clone(),
                    report.build_id.clone(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(|source| Error::Io { path: path.clone(), source })
        }
    }
}

/// A matplotlib script that draws every non-time column of `csv_path`
/// against `t`.
pub fn plot_script(csv_path: &Path, columns: &[String]) -> String {
    let mut s = String::new();
    s.push_str("import csv\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("with open({:?}) as f:\n", csv_path.display().to_string()));
    s.push_str("    rows = list(csv.DictReader(f))\n");
    s.push_str("t = [float(r[\"t\"]) for r in rows]\n");
    s.push_str("fig, ax = plt.subplots(figsize=(10, 4))\n");
    for c in columns.iter().filter(|c| c.as_str() != "t") {
        s.push_str(&format!("ax.plot(t, [float(r[{c:?}]) for r in rows], lw=0.8, label={c:?})\n"));
    }
    s.push_str("ax.set_xlabel(\"t\")\nax.set_ylabel(\"y\")\nfig.tight_layout()\nplt.show()\n");
    s
}

pub fn write_plot_script(path: &Path, csv_path: &Path, columns: &[String]) -> Result<()> {
    std::fs::write(path, plot_script(csv_path, columns)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
