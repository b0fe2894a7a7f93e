//! Experiment harness: repeated trials over named topologies with freshly
//! sampled failure probabilities, approximate and exact solves side by
//! side, reports and figure series.
//!
//! * A: gateway count plus node-to-gateway latency (unbudgeted).
//! * B: node-to-gateway reliability under a gateway budget.
//! * C: controller latency plus synchronisation overhead, gateways fixed.
//! * D: node-to-controller reliability under a controller budget.

mod figures;
mod report;
mod verify;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{
    controller_cost_breakdown, controller_utility, gateway_cost, gateway_utility, ControllerPolicy, GatewayPolicy,
    ObjectiveConfig,
};
use crate::paths::{build_reliability_tables, PathTables};
use crate::solvers::{
    double_greedy_restarts, exact_enumerate, exact_feasible, solve_gateway_latency, threshold_greedy, FacilityOracle,
    Method, SetFunction, SolveResult, SolverOptions,
};
use crate::topology::{load_topology, sample_failures, FailureCase, Topology};

pub use figures::{plot_data, Figure, FigureData, Series, SeriesPoint};
pub use report::{aggregate, emit_report, write_csv, Aggregate, ReportFormat, Stat, CSV_HEADER};
pub use verify::{verify_report, VerifyOutcome};

/// Largest unbudgeted ground set for which the harness adds an exact run
/// on its own.
pub const AUTO_EXACT_UNBUDGETED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    A,
    B,
    C,
    D,
}

impl Experiment {
    /// Whether the maximised function is a utility (B, D) rather than a
    /// cost complement (A, C).
    pub fn is_reliability(self) -> bool {
        matches!(self, Experiment::B | Experiment::D)
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Experiment::A),
            "B" => Ok(Experiment::B),
            "C" => Ok(Experiment::C),
            "D" => Ok(Experiment::D),
            _ => Err(Error::invalid(format!("unknown experiment '{s}' (expected A, B, C or D)"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKey {
    Alpha,
    Beta,
    GMax,
    KMax,
    Case,
}

impl SweepKey {
    pub fn name(self) -> &'static str {
        match self {
            SweepKey::Alpha => "alpha",
            SweepKey::Beta => "beta",
            SweepKey::GMax => "gmax",
            SweepKey::KMax => "kmax",
            SweepKey::Case => "case",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepKey::GMax | SweepKey::KMax | SweepKey::Case)
    }
}

impl FromStr for SweepKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "").as_str() {
            "alpha" => Ok(SweepKey::Alpha),
            "beta" => Ok(SweepKey::Beta),
            "gmax" | "mmax" => Ok(SweepKey::GMax),
            "kmax" => Ok(SweepKey::KMax),
            "case" => Ok(SweepKey::Case),
            _ => Err(Error::invalid(format!("unknown sweep key '{s}' (expected alpha, beta, gmax, kmax or case)"))),
        }
    }
}

impl fmt::Display for SweepKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    /// Parses `key=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, values) =
            s.split_once('=').ok_or_else(|| Error::invalid(format!("sweep '{s}' must look like key=v1,v2,...")))?;
        let key: SweepKey = key.parse()?;
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::invalid(format!("sweep {key}: '{v}' is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        let sweep = Sweep { key, values };
        sweep.validate()?;
        Ok(sweep)
    }
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid(format!("sweep {} has no values", self.key)));
        }
        for &v in &self.values {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("sweep {}: values must be finite and positive, got {v}", self.key)));
            }
            if self.key.is_integer() && v.fract() != 0.0 {
                return Err(Error::invalid(format!("sweep {}: values must be integers, got {v}", self.key)));
            }
            if self.key == SweepKey::Case && v > 4.0 {
                return Err(Error::invalid(format!("sweep case: failure case must be 1..4, got {v}")));
            }
        }
        Ok(())
    }
}

/// Fully resolved parameters of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub g_max: usize,
    pub k_max: usize,
    pub case: u8,
}

impl SweepPoint {
    pub fn get(&self, key: SweepKey) -> f64 {
        match key {
            SweepKey::Alpha => self.alpha,
            SweepKey::Beta => self.beta,
            SweepKey::GMax => self.g_max as f64,
            SweepKey::KMax => self.k_max as f64,
            SweepKey::Case => self.case as f64,
        }
    }

    fn set(&mut self, key: SweepKey, v: f64) {
        match key {
            SweepKey::Alpha => self.alpha = v,
            SweepKey::Beta => self.beta = v,
            SweepKey::GMax => self.g_max = v as usize,
            SweepKey::KMax => self.k_max = v as usize,
            SweepKey::Case => self.case = v as u8,
        }
    }

    pub fn apply(&self, cfg: &ObjectiveConfig) -> ObjectiveConfig {
        ObjectiveConfig { alpha: self.alpha, beta: self.beta, g_max: self.g_max, k_max: self.k_max, ..*cfg }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactPolicy {
    /// Add an exact run when the instance is small enough.
    #[default]
    Auto,
    Never,
    /// Exact on every instance; oversized instances are an error.
    Always,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub topologies: Vec<String>,
    pub case: u8,
    pub trials: usize,
    pub seed: u64,
    pub cfg: ObjectiveConfig,
    /// `seed` is ignored; every trial derives its own.
    pub solver: SolverOptions,
    pub sweep: Vec<Sweep>,
    pub exact: ExactPolicy,
    /// Record solver wall time. Off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, topologies: &[&str]) -> Self {
        ExperimentSpec {
            experiment,
            topologies: topologies.iter().map(|s| s.to_string()).collect(),
            case: 1,
            trials: 100,
            seed: 0,
            cfg: ObjectiveConfig::default(),
            solver: SolverOptions::default(),
            sweep: Vec::new(),
            exact: ExactPolicy::Auto,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topologies.is_empty() {
            return Err(Error::invalid("no topologies given"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        FailureCase::builtin(self.case)?;
        if !(self.solver.epsilon > 0.0 && self.solver.epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must be in (0, 1), got {}", self.solver.epsilon)));
        }
        if self.solver.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        for (i, s) in self.sweep.iter().enumerate() {
            s.validate()?;
            if self.sweep[..i].iter().any(|o| o.key == s.key) {
                return Err(Error::invalid(format!("sweep key {} given twice", s.key)));
            }
        }
        Ok(())
    }

    pub fn swept(&self, key: SweepKey) -> bool {
        self.sweep.iter().any(|s| s.key == key)
    }

    /// Cartesian product of the sweep, first key varying slowest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let base =
            SweepPoint { alpha: self.cfg.alpha, beta: self.cfg.beta, g_max: self.cfg.g_max, k_max: self.cfg.k_max, case: self.case };
        let mut points = vec![base];
        for s in &self.sweep {
            points = points
                .iter()
                .flat_map(|p| {
                    s.values.iter().map(move |&v| {
                        let mut q = *p;
                        q.set(s.key, v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// One solver run in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub topology: String,
    pub nodes: usize,
    pub trial: usize,
    pub method: Method,
    /// Cost for A and C, utility for B and D.
    pub objective: f64,
    pub avg_latency_ms: f64,
    pub avg_reliability: f64,
    pub facilities: usize,
    pub time_ms: Option<f64>,
    /// Approximate over exact value of the maximised function.
    pub approx_ratio: Option<f64>,
    pub point: SweepPoint,
    /// Value of the maximised function (utility or cost complement).
    pub maximized: f64,
    pub evaluations: u64,
    pub open: Vec<usize>,
    /// Gateways held fixed in experiment C.
    pub gateway_open: Option<Vec<usize>>,
    /// Node-to-controller latency part of the controller cost (C only).
    pub c1: Option<f64>,
    /// Unweighted synchronisation part of the controller cost (C only).
    pub sync_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Seed of trial `trial` derived from the master seed (splitmix64).
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Failure-sampled tables used by trial `trial`.
pub fn trial_tables(base: &Topology, case: u8, master_seed: u64, trial: usize, k_paths: usize) -> Result<(Topology, PathTables)> {
    let topo = sample_failures(base, &FailureCase::builtin(case)?, trial_seed(master_seed, trial));
    let tables = build_reliability_tables(&topo, k_paths)?;
    Ok((topo, tables))
}

/// Gateway policy held fixed in experiment C: exact when enumerable,
/// otherwise double greedy.
pub fn fixed_gateways(tables: &PathTables, cfg: &ObjectiveConfig, opts: &SolverOptions) -> Result<GatewayPolicy> {
    let method = if tables.gateways().len() <= AUTO_EXACT_UNBUDGETED { Method::Exact } else { Method::Approx };
    Ok(solve_gateway_latency(tables, cfg, method, opts)?.0)
}

fn budget_of(exp: Experiment, cfg: &ObjectiveConfig) -> Option<usize> {
    match exp {
        Experiment::A | Experiment::C => None,
        Experiment::B => Some(cfg.g_max),
        Experiment::D => Some(cfg.k_max),
    }
}

fn build_oracle(exp: Experiment, tables: &PathTables, cfg: &ObjectiveConfig, gw: Option<&GatewayPolicy>) -> FacilityOracle {
    match exp {
        Experiment::A => FacilityOracle::gateway_complement(tables, cfg),
        Experiment::B => FacilityOracle::gateway_utility(tables),
        Experiment::C => FacilityOracle::controller_complement(gw.expect("gateway policy"), tables, cfg),
        Experiment::D => FacilityOracle::controller_utility(tables),
    }
}

fn wants_exact(policy: ExactPolicy, n: usize, budget: Option<usize>) -> Result<bool> {
    match policy {
        ExactPolicy::Never => Ok(false),
        ExactPolicy::Always => exact_feasible(n, budget).map(|_| true),
        ExactPolicy::Auto => Ok(match budget.filter(|&b| b < n) {
            None => n <= AUTO_EXACT_UNBUDGETED,
            Some(b) => exact_feasible(n, Some(b)).is_ok(),
        }),
    }
}

/// Metrics that depend only on the experiment, the open set and tables.
pub(crate) struct Described {
    pub objective: f64,
    pub avg_latency_ms: f64,
    pub avg_reliability: f64,
    pub c1: Option<f64>,
    pub sync_cost: Option<f64>,
}

pub(crate) fn describe(
    exp: Experiment,
    open: &[usize],
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    gw: Option<&GatewayPolicy>,
) -> Result<Described> {
    Ok(match exp {
        Experiment::A => {
            let p = GatewayPolicy::by_latency(open, tables)?;
            Described {
                objective: gateway_cost(open, tables, cfg)?,
                avg_latency_ms: p.avg_latency_ms(tables),
                avg_reliability: p.avg_reliability(tables),
                c1: None,
                sync_cost: None,
            }
        }
        Experiment::B => {
            let p = GatewayPolicy::by_reliability(open, tables)?;
            Described {
                objective: gateway_utility(open, tables)?,
                avg_latency_ms: p.avg_latency_ms(tables),
                avg_reliability: p.avg_reliability(tables),
                c1: None,
                sync_cost: None,
            }
        }
        Experiment::C => {
            let gw = gw.ok_or_else(|| Error::invalid("experiment C needs a gateway policy"))?;
            let p = ControllerPolicy::by_latency(open, tables)?;
            let cost = controller_cost_breakdown(open, gw, tables, cfg)?;
            Described {
                objective: cost.total,
                avg_latency_ms: p.avg_latency_ms(tables),
                avg_reliability: p.avg_reliability(tables),
                c1: Some(cost.c1),
                sync_cost: Some(cost.sync()),
            }
        }
        Experiment::D => {
            let p = ControllerPolicy::by_reliability(open, tables)?;
            Described {
                objective: controller_utility(open, tables)?,
                avg_latency_ms: p.avg_latency_ms(tables),
                avg_reliability: p.avg_reliability(tables),
                c1: None,
                sync_cost: None,
            }
        }
    })
}

struct Job<'a> {
    name: &'a str,
    base: &'a Topology,
    point: SweepPoint,
    trial: usize,
}

fn run_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<TrialRow>> {
    let exp = spec.experiment;
    let seed = trial_seed(spec.seed, job.trial);
    let cfg = job.point.apply(&spec.cfg);
    let (_, tables) = trial_tables(job.base, job.point.case, spec.seed, job.trial, cfg.k_paths)?;
    cfg.validate(&tables)?;
    let opts = SolverOptions { seed, ..spec.solver };

    let gw = match exp {
        Experiment::C => Some(fixed_gateways(&tables, &cfg, &opts)?),
        _ => None,
    };
    let oracle = build_oracle(exp, &tables, &cfg, gw.as_ref());
    let budget = budget_of(exp, &cfg);
    let n = oracle.ground_size();

    let approx = match budget {
        Some(b) => threshold_greedy(&oracle, b, opts.epsilon)?,
        None => double_greedy_restarts(&oracle, opts.seed, opts.restarts)?,
    };
    let exact = if wants_exact(spec.exact, n, budget)? { Some(exact_enumerate(&oracle, budget)?) } else { None };

    let row = |method: Method, r: &SolveResult, ratio: Option<f64>| -> Result<TrialRow> {
        let d = describe(exp, &r.open, &tables, &cfg, gw.as_ref())?;
        Ok(TrialRow {
            topology: job.name.to_string(),
            nodes: tables.node_count(),
            trial: job.trial,
            method,
            objective: d.objective,
            avg_latency_ms: d.avg_latency_ms,
            avg_reliability: d.avg_reliability,
            facilities: r.open.len(),
            time_ms: spec.timing.then_some(r.wall_time_ms),
            approx_ratio: ratio,
            point: job.point,
            maximized: r.value,
            evaluations: r.evaluations,
            open: r.open.clone(),
            gateway_open: gw.as_ref().map(|g| g.open.clone()),
            c1: d.c1,
            sync_cost: d.sync_cost,
        })
    };
    let ratio = exact.as_ref().map(|e| approx.value / e.value);
    let mut rows = vec![row(Method::Approx, &approx, ratio)?];
    if let Some(e) = &exact {
        rows.push(row(Method::Exact, e, None)?);
    }
    Ok(rows)
}

/// Run every sweep point × topology × trial. Trials run in parallel on the
/// current rayon pool; rows come back ordered by point, topology, trial and
/// method regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let topologies =
        spec.topologies.iter().map(|name| Ok((name.as_str(), load_topology(name)?))).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for point in spec.points() {
        for (name, base) in &topologies {
            for trial in 0..spec.trials {
                jobs.push(Job { name, base, point, trial });
            }
        }
    }
    let rows: Vec<TrialRow> = jobs
        .par_iter()
        .map(|job| run_job(spec, job))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let aggregates = aggregate(&rows);
    Ok(ExperimentReport { spec: spec.clone(), rows, aggregates })
}
