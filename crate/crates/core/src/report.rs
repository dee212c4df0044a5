//! Deterministic CSV and report-line formatting.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::domain::{Grid1D, SpatialField};
use crate::dynamics::TimeSeries;
use crate::spectra::EigenResult;

/// 17 significant digits: exact f64 round-trip, byte-stable across runs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One verification check in machine-readable form.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub satisfied: bool,
}

impl CheckRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.name,
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.rel_err),
            self.satisfied
        )
    }
}

/// Status of a named report step: `name,status,detail`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Info,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
            Status::Info => "info",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ReportLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl ReportLine {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        ReportLine {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        // detail may contain commas; quote it so the line stays one CSV record
        format!("{},{},\"{}\"", self.name, self.status, self.detail)
    }
}

pub fn field_csv(field: &SpatialField) -> String {
    let mut out = String::from("x,value\n");
    for (i, x) in field.grid().centers().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(field.values()[i]));
    }
    out
}

pub fn profiles_csv(grid: Grid1D, u: &SpatialField, v: &SpatialField) -> String {
    let mut out = String::from("x,u,v\n");
    for (i, x) in grid.centers().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(x),
            fmt_f64(u.values()[i]),
            fmt_f64(v.values()[i])
        );
    }
    out
}

pub fn timeseries_csv(series: &TimeSeries) -> String {
    let mut out = String::from("t,mass_u,mass_v,sup_u,sup_v,rate_u,rate_v\n");
    for s in &series.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.mass_u),
            fmt_f64(s.mass_v),
            fmt_f64(s.sup_u),
            fmt_f64(s.sup_v),
            fmt_f64(s.rate_u),
            fmt_f64(s.rate_v)
        );
    }
    out
}

pub fn eigen_csv(result: &EigenResult) -> String {
    let mut out = String::from("x,psi\n");
    for (i, x) in result.psi.grid().centers().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(result.psi.values()[i]));
    }
    out
}

/// Scalar summary line for an eigen result: `sigma1,residual,iterations`.
pub fn eigen_summary(result: &EigenResult) -> String {
    format!(
        "sigma1,residual,iterations\n{},{},{}\n",
        fmt_f64(result.sigma1),
        fmt_f64(result.residual),
        result.iterations
    )
}

pub fn checks_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check_name,lhs,rhs,rel_err,satisfied\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

pub fn write_text(path: &Path, content: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())
}

/// FNV-1a over bytes; stable across runs and platforms.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Run metadata; written as plain text, outside the byte-identical CSV contract
/// (it records wall-clock time).
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub scenario_hash: u64,
    pub command: String,
    pub outputs: Vec<String>,
    pub wall_ms: u128,
    pub summary: String,
}

impl RunManifest {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario_hash: {:016x}", self.scenario_hash);
        let _ = writeln!(out, "command: {}", self.command);
        for o in &self.outputs {
            let _ = writeln!(out, "output: {o}");
        }
        let _ = writeln!(out, "wall_ms: {}", self.wall_ms);
        let _ = writeln!(out, "summary: {}", self.summary);
        out
    }
}
