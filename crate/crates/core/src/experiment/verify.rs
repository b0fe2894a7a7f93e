use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{describe, trial_tables, Experiment, ExperimentReport, TrialRow};
use crate::error::Result;
use crate::objectives::GatewayPolicy;
use crate::paths::PathTables;
use crate::solvers::Method;
use crate::topology::{load_topology, Topology};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub rows_checked: usize,
    pub mismatches: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

/// Rebuild every trial's tables from the report's own spec and recompute
/// each row's metrics from its emitted facility set. Values must match bit
/// for bit; exact rows must dominate their approximate partner.
pub fn verify_report(report: &ExperimentReport) -> Result<VerifyOutcome> {
    let spec = &report.spec;
    let mut topologies: HashMap<&str, Topology> = HashMap::new();
    for name in &spec.topologies {
        topologies.insert(name, load_topology(name)?);
    }
    let mut out = VerifyOutcome::default();
    let mut exact_of: HashMap<String, &TrialRow> = HashMap::new();
    let key = |r: &TrialRow| format!("{}|{}|{:?}", r.topology, r.trial, r.point);
    for r in report.rows.iter().filter(|r| r.method == Method::Exact) {
        exact_of.insert(key(r), r);
    }

    let mut cache: Option<(String, PathTables)> = None;
    for r in &report.rows {
        let id = key(r);
        let tables = match &cache {
            Some((k, t)) if *k == id => t,
            _ => {
                let base = &topologies[r.topology.as_str()];
                let cfg = r.point.apply(&spec.cfg);
                let (_, t) = trial_tables(base, r.point.case, spec.seed, r.trial, cfg.k_paths)?;
                cache = Some((id.clone(), t));
                &cache.as_ref().unwrap().1
            }
        };
        let cfg = r.point.apply(&spec.cfg);
        let gw = match (&r.gateway_open, spec.experiment) {
            (Some(open), Experiment::C) => Some(GatewayPolicy::by_latency(open, tables)?),
            _ => None,
        };
        let d = describe(spec.experiment, &r.open, tables, &cfg, gw.as_ref())?;
        let tag = format!("{} trial {} {}", r.topology, r.trial, r.method);
        let checks = [
            ("objective", d.objective, r.objective),
            ("avg_latency_ms", d.avg_latency_ms, r.avg_latency_ms),
            ("avg_reliability", d.avg_reliability, r.avg_reliability),
        ];
        for (what, expect, got) in checks {
            if !same(expect, got) {
                out.mismatches.push(format!("{tag}: {what} reported {got}, recomputed {expect}"));
            }
        }
        if r.facilities != r.open.len() {
            out.mismatches.push(format!("{tag}: facilities {} but {} open", r.facilities, r.open.len()));
        }
        if let (Some(c1), Some(c)) = (r.c1, d.c1) {
            if !same(c1, c) {
                out.mismatches.push(format!("{tag}: c1 reported {c1}, recomputed {c}"));
            }
        }
        if r.method == Method::Approx {
            if let Some(e) = exact_of.get(&id) {
                if r.maximized > e.maximized + 1e-9 * e.maximized.abs().max(1.0) {
                    out.mismatches.push(format!("{tag}: approximate value {} beats exact {}", r.maximized, e.maximized));
                }
                match r.approx_ratio {
                    Some(q) if same(q, r.maximized / e.maximized) => {}
                    q => out.mismatches.push(format!("{tag}: approx_ratio {q:?} inconsistent")),
                }
            }
        }
        out.rows_checked += 1;
    }
    Ok(out)
}
