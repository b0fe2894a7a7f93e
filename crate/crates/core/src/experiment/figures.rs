use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentReport, SweepKey, TrialRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Objective, latency and gateway count per topology (A).
    LatGw,
    /// Gateway count and latency against alpha (A).
    GwTradeoff,
    /// Reliability per failure case (B or D).
    RelCases,
    /// Reliability against the facility budget (B or D).
    RelVsBudget,
    /// Synchronisation cost against controller latency across beta (C).
    SyncTradeoff,
    /// Mean solver time against topology size.
    Runtime,
}

impl Figure {
    pub const ALL: [Figure; 6] =
        [Figure::LatGw, Figure::GwTradeoff, Figure::RelCases, Figure::RelVsBudget, Figure::SyncTradeoff, Figure::Runtime];

    pub fn name(self) -> &'static str {
        match self {
            Figure::LatGw => "lat_gw",
            Figure::GwTradeoff => "gw_tradeoff",
            Figure::RelCases => "rel_cases",
            Figure::RelVsBudget => "rel_vs_budget",
            Figure::SyncTradeoff => "sync_tradeoff",
            Figure::Runtime => "runtime",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown figure '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub figure: Figure,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl FigureData {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// `series,label,x,y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["series", "label", self.x_label.as_str(), self.y_label.as_str()])?;
        for s in &self.series {
            for p in &s.points {
                w.write_record([s.name.clone(), p.label.clone(), p.x.to_string(), p.y.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Means of `y` over rows sharing a series name and x, in order of first
/// appearance.
struct Builder {
    series: Vec<(String, Vec<(String, f64, Vec<f64>)>)>,
}

impl Builder {
    fn new() -> Self {
        Builder { series: Vec::new() }
    }

    fn push(&mut self, series: String, label: String, x: f64, y: f64) {
        let idx = match self.series.iter().position(|(n, _)| *n == series) {
            Some(i) => i,
            None => {
                self.series.push((series, Vec::new()));
                self.series.len() - 1
            }
        };
        let pts = &mut self.series[idx].1;
        match pts.iter_mut().find(|(l, px, _)| *l == label && px.to_bits() == x.to_bits()) {
            Some(p) => p.2.push(y),
            None => pts.push((label, x, vec![y])),
        }
    }

    fn finish(self, figure: Figure, x_label: &str, y_label: &str) -> FigureData {
        let series = self
            .series
            .into_iter()
            .map(|(name, pts)| Series {
                name,
                points: pts
                    .into_iter()
                    .map(|(label, x, ys)| SeriesPoint { label, x, y: ys.iter().sum::<f64>() / ys.len() as f64 })
                    .collect(),
            })
            .collect();
        FigureData { figure, x_label: x_label.into(), y_label: y_label.into(), series }
    }
}

fn need_experiment(report: &ExperimentReport, figure: Figure, allowed: &[Experiment]) -> Result<()> {
    if allowed.contains(&report.spec.experiment) {
        return Ok(());
    }
    let names: Vec<String> = allowed.iter().map(|e| e.to_string()).collect();
    Err(Error::invalid(format!(
        "figure {} needs experiment {}, report is experiment {}",
        figure.name(),
        names.join(" or "),
        report.spec.experiment
    )))
}

fn need_sweep(report: &ExperimentReport, figure: Figure, key: SweepKey) -> Result<()> {
    if report.spec.swept(key) {
        Ok(())
    } else {
        Err(Error::invalid(format!("figure {} needs a sweep over {}", figure.name(), key)))
    }
}

fn budget_key(exp: Experiment) -> SweepKey {
    if exp == Experiment::D {
        SweepKey::KMax
    } else {
        SweepKey::GMax
    }
}

/// Columnar series behind one figure, averaged over trials.
pub fn plot_data(report: &ExperimentReport, figure: Figure) -> Result<FigureData> {
    let exp = report.spec.experiment;
    let rows = &report.rows;
    let mut b = Builder::new();
    let key = |r: &TrialRow| format!("{}:{}", r.topology, r.method);
    Ok(match figure {
        Figure::LatGw => {
            need_experiment(report, figure, &[Experiment::A])?;
            for r in rows {
                let label = r.topology.clone();
                let x = r.nodes as f64;
                b.push(format!("{}:objective", r.method), label.clone(), x, r.objective);
                b.push(format!("{}:avg_latency_ms", r.method), label.clone(), x, r.avg_latency_ms);
                b.push(format!("{}:gateways", r.method), label, x, r.facilities as f64);
            }
            b.finish(figure, "nodes", "value")
        }
        Figure::GwTradeoff => {
            need_experiment(report, figure, &[Experiment::A])?;
            need_sweep(report, figure, SweepKey::Alpha)?;
            for r in rows {
                let label = format!("alpha={}", r.point.alpha);
                b.push(format!("{}:gateways", key(r)), label.clone(), r.point.alpha, r.facilities as f64);
                b.push(format!("{}:avg_latency_ms", key(r)), label, r.point.alpha, r.avg_latency_ms);
            }
            b.finish(figure, "alpha", "value")
        }
        Figure::RelCases => {
            need_experiment(report, figure, &[Experiment::B, Experiment::D])?;
            need_sweep(report, figure, SweepKey::Case)?;
            for r in rows {
                b.push(key(r), format!("case {}", r.point.case), r.point.case as f64, r.avg_reliability);
            }
            b.finish(figure, "case", "avg_reliability")
        }
        Figure::RelVsBudget => {
            need_experiment(report, figure, &[Experiment::B, Experiment::D])?;
            let k = budget_key(exp);
            need_sweep(report, figure, k)?;
            for r in rows {
                let x = r.point.get(k);
                b.push(key(r), format!("{k}={x}"), x, r.avg_reliability);
            }
            b.finish(figure, k.name(), "avg_reliability")
        }
        Figure::SyncTradeoff => {
            need_experiment(report, figure, &[Experiment::C])?;
            need_sweep(report, figure, SweepKey::Beta)?;
            for r in rows {
                let series = format!("{}:alpha={}", key(r), r.point.alpha);
                let sync = r.sync_cost.ok_or_else(|| Error::invalid("experiment C row without sync cost"))?;
                // x is beta here; the latency axis is carried as a second series
                b.push(format!("{series}:sync_cost"), format!("beta={}", r.point.beta), r.point.beta, sync);
                b.push(format!("{series}:avg_latency_ms"), format!("beta={}", r.point.beta), r.point.beta, r.avg_latency_ms);
            }
            b.finish(figure, "beta", "value")
        }
        Figure::Runtime => {
            if !report.spec.timing {
                return Err(Error::invalid("figure runtime needs timing (run with timing enabled)"));
            }
            for r in rows {
                let t = r.time_ms.ok_or_else(|| Error::invalid("row without solver time"))?;
                b.push(r.method.to_string(), r.topology.clone(), r.nodes as f64, t);
            }
            b.finish(figure, "nodes", "time_ms")
        }
    })
}
