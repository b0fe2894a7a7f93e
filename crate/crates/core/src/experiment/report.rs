use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, SweepPoint, TrialRow};
use crate::error::{Error, Result};
use crate::solvers::Method;

pub const CSV_HEADER: [&str; 9] =
    ["topology", "trial", "method", "objective", "avg_latency_ms", "avg_reliability", "facilities", "time_ms", "approx_ratio"];

const AGGREGATE_HEADER: [&str; 15] = [
    "topology",
    "method",
    "trials",
    "objective_mean",
    "objective_std",
    "avg_latency_ms_mean",
    "avg_latency_ms_std",
    "avg_reliability_mean",
    "avg_reliability_std",
    "facilities_mean",
    "facilities_std",
    "time_ms_mean",
    "time_ms_std",
    "approx_ratio_mean",
    "approx_ratio_std",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::invalid(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Stat { mean, std })
    }
}

/// Per sweep point, topology and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub topology: String,
    pub nodes: usize,
    pub method: Method,
    pub point: SweepPoint,
    pub trials: usize,
    pub objective: Stat,
    pub avg_latency_ms: Stat,
    pub avg_reliability: Stat,
    pub facilities: Stat,
    pub time_ms: Option<Stat>,
    pub approx_ratio: Option<Stat>,
    pub sync_cost: Option<Stat>,
    pub c1: Option<Stat>,
}

fn collect(rows: &[&TrialRow], f: impl Fn(&TrialRow) -> Option<f64>) -> Option<Stat> {
    let values: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
    Stat::of(&values)
}

/// Group rows by (point, topology, method) in order of first appearance.
pub fn aggregate(rows: &[TrialRow]) -> Vec<Aggregate> {
    let mut groups: Vec<Vec<&TrialRow>> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|g| {
            let h = g[0];
            h.point == row.point && h.topology == row.topology && h.method == row.method
        }) {
            Some(g) => g.push(row),
            None => groups.push(vec![row]),
        }
    }
    groups
        .into_iter()
        .map(|g| Aggregate {
            topology: g[0].topology.clone(),
            nodes: g[0].nodes,
            method: g[0].method,
            point: g[0].point,
            trials: g.len(),
            objective: collect(&g, |r| Some(r.objective)).unwrap(),
            avg_latency_ms: collect(&g, |r| Some(r.avg_latency_ms)).unwrap(),
            avg_reliability: collect(&g, |r| Some(r.avg_reliability)).unwrap(),
            facilities: collect(&g, |r| Some(r.facilities as f64)).unwrap(),
            time_ms: collect(&g, |r| r.time_ms),
            approx_ratio: collect(&g, |r| r.approx_ratio),
            sync_cost: collect(&g, |r| r.sync_cost),
            c1: collect(&g, |r| r.c1),
        })
        .collect()
}

/// Nine significant digits, shortest form.
fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap();
    format!("{rounded}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

fn opt_stat(s: Option<Stat>) -> [String; 2] {
    match s {
        Some(s) => [sig9(s.mean), sig9(s.std)],
        None => [String::new(), String::new()],
    }
}

/// Rows and aggregates of one sweep point as CSV: the trial table, a blank
/// line, then the aggregate table.
pub fn write_csv<W: Write>(report: &ExperimentReport, point: &SweepPoint, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in report.rows.iter().filter(|r| &r.point == point) {
        w.write_record([
            r.topology.clone(),
            r.trial.to_string(),
            r.method.to_string(),
            sig9(r.objective),
            sig9(r.avg_latency_ms),
            sig9(r.avg_reliability),
            r.facilities.to_string(),
            opt(r.time_ms),
            opt(r.approx_ratio),
        ])?;
    }
    let mut out = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write_all(b"\n")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for a in report.aggregates.iter().filter(|a| &a.point == point) {
        let mut rec = vec![a.topology.clone(), a.method.to_string(), a.trials.to_string()];
        for s in [a.objective, a.avg_latency_ms, a.avg_reliability, a.facilities] {
            rec.extend(opt_stat(Some(s)));
        }
        rec.extend(opt_stat(a.time_ms));
        rec.extend(opt_stat(a.approx_ratio));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn point_file_stem(report: &ExperimentReport, point: &SweepPoint) -> String {
    let mut stem = format!("exp_{}", report.spec.experiment.to_string().to_ascii_lowercase());
    for s in &report.spec.sweep {
        stem.push_str(&format!("_{}-{}", s.key, point.get(s.key)));
    }
    stem
}

/// Write the report into `dir`: one CSV per sweep point, or a single JSON
/// document with the spec, every row and the aggregates. Returns the
/// written paths.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            for point in report.spec.points() {
                let path = dir.join(format!("{}.csv", point_file_stem(report, &point)));
                write_csv(report, &point, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
                written.push(path);
            }
        }
        ReportFormat::Json => {
            let stem = format!("exp_{}", report.spec.experiment.to_string().to_ascii_lowercase());
            let path = dir.join(format!("{stem}.json"));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            serde_json::to_writer_pretty(&mut f, report)?;
            f.write_all(b"\n")?;
            f.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.1234567891234), "0.123456789");
        assert_eq!(sig9(123456.78912), "123456.789");
        assert_eq!(sig9(2.0), "2");
        assert_eq!(sig9(1e-12), "0.000000000001");
    }

    #[test]
    fn stats() {
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Stat::of(&[7.0]).unwrap().std, 0.0);
        assert!(Stat::of(&[]).is_none());
    }
}
