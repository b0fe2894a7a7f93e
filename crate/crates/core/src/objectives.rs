//! Gateway and controller cost/utility functions, evaluated as set
//! functions over open facilities.
//!
//! Given the open set, the best assignment is unique up to ties: every node
//! goes to its nearest (latency objectives) or most reliable (reliability
//! objectives) open facility. Ties go to the lowest facility id. All
//! functions here evaluate that induced assignment directly, so no
//! assignment variables are ever materialised.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::PathTables;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// Weight of the node-to-gateway latency term against the gateway count.
    pub alpha: f64,
    /// Weight of the synchronisation block in the controller cost.
    pub beta: f64,
    /// Weight of the controller block in the joint cost.
    pub psi: f64,
    /// Load-proportional synchronisation rate per controller pair.
    pub l_con: f64,
    pub g_max: usize,
    pub k_max: usize,
    pub k_paths: usize,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig { alpha: 1.0, beta: 1.0, psi: 1.0, l_con: 0.1, g_max: 5, k_max: 5, k_paths: 1 }
    }
}

impl ObjectiveConfig {
    /// Check weights and budgets; budgets must not exceed the candidate sets
    /// of `tables`.
    pub fn validate(&self, tables: &PathTables) -> Result<()> {
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta), ("psi", self.psi), ("l_con", self.l_con)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative, got {w}")));
            }
        }
        if self.k_paths == 0 {
            return Err(Error::invalid("k_paths must be at least 1"));
        }
        if self.g_max == 0 || self.g_max > tables.gateways().len() {
            return Err(Error::invalid(format!(
                "g_max must be in 1..={}, got {}",
                tables.gateways().len(),
                self.g_max
            )));
        }
        if self.k_max == 0 || self.k_max > tables.controllers().len() {
            return Err(Error::invalid(format!(
                "k_max must be in 1..={}, got {}",
                tables.controllers().len(),
                self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Map every node `0..n_nodes` to its best open facility under `score`.
/// Ties resolve to the lowest facility id.
pub fn induce_assignment(
    open: &[usize],
    n_nodes: usize,
    score: impl Fn(usize, usize) -> f64,
    sense: Sense,
) -> Result<Vec<usize>> {
    if open.is_empty() {
        return Err(Error::EmptyPolicy);
    }
    let mut facilities = open.to_vec();
    facilities.sort_unstable();
    Ok((0..n_nodes)
        .map(|v| {
            let mut best = facilities[0];
            let mut best_score = score(best, v);
            for &f in &facilities[1..] {
                let s = score(f, v);
                let better = match sense {
                    Sense::Minimize => s < best_score,
                    Sense::Maximize => s > best_score,
                };
                if better {
                    best = f;
                    best_score = s;
                }
            }
            best
        })
        .collect())
}

fn normalize(open: &[usize], is_candidate: impl Fn(usize) -> bool, what: &str) -> Result<Vec<usize>> {
    if open.is_empty() {
        return Err(Error::EmptyPolicy);
    }
    let mut set = open.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&bad) = set.iter().find(|&&f| !is_candidate(f)) {
        return Err(Error::invalid(format!("node {bad} is not a {what} candidate")));
    }
    Ok(set)
}

/// Open gateways plus the node-to-gateway assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayPolicy {
    pub open: Vec<usize>,
    pub assign: Vec<usize>,
}

impl GatewayPolicy {
    /// Assign each node to its nearest open gateway.
    pub fn by_latency(open: &[usize], tables: &PathTables) -> Result<Self> {
        let open = normalize(open, |j| tables.is_gateway_candidate(j), "gateway")?;
        let assign = induce_assignment(&open, tables.node_count(), |j, v| tables.latency(j, v), Sense::Minimize)?;
        Ok(GatewayPolicy { open, assign })
    }

    /// Assign each node to its most reliable open gateway.
    pub fn by_reliability(open: &[usize], tables: &PathTables) -> Result<Self> {
        let open = normalize(open, |j| tables.is_gateway_candidate(j), "gateway")?;
        let assign = induce_assignment(&open, tables.node_count(), |j, v| tables.r_sat(j, v), Sense::Maximize)?;
        Ok(GatewayPolicy { open, assign })
    }

    pub fn avg_latency_ms(&self, tables: &PathTables) -> f64 {
        mean(self.assign.iter().enumerate().map(|(v, &j)| tables.latency(j, v)))
    }

    pub fn avg_reliability(&self, tables: &PathTables) -> f64 {
        mean(self.assign.iter().enumerate().map(|(v, &j)| tables.r_sat(j, v)))
    }
}

/// Open controllers plus the node-to-controller assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerPolicy {
    pub open: Vec<usize>,
    pub assign: Vec<usize>,
}

impl ControllerPolicy {
    pub fn by_latency(open: &[usize], tables: &PathTables) -> Result<Self> {
        let open = normalize(open, |k| tables.is_controller_candidate(k), "controller")?;
        let assign = induce_assignment(&open, tables.node_count(), |k, v| tables.latency(k, v), Sense::Minimize)?;
        Ok(ControllerPolicy { open, assign })
    }

    pub fn by_reliability(open: &[usize], tables: &PathTables) -> Result<Self> {
        let open = normalize(open, |k| tables.is_controller_candidate(k), "controller")?;
        let assign = induce_assignment(&open, tables.node_count(), |k, v| tables.r_ctl(k, v), Sense::Maximize)?;
        Ok(ControllerPolicy { open, assign })
    }

    pub fn avg_latency_ms(&self, tables: &PathTables) -> f64 {
        mean(self.assign.iter().enumerate().map(|(v, &k)| tables.latency(k, v)))
    }

    pub fn avg_reliability(&self, tables: &PathTables) -> f64 {
        mean(self.assign.iter().enumerate().map(|(v, &k)| tables.r_ctl(k, v)))
    }

    /// Number of nodes assigned to each open controller, in `open` order.
    pub fn loads(&self) -> Vec<usize> {
        self.open.iter().map(|&k| self.assign.iter().filter(|&&a| a == k).count()).collect()
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

/// `|open| + alpha * sum_v d(nearest open gateway, v)`.
pub fn gateway_cost(open: &[usize], tables: &PathTables, cfg: &ObjectiveConfig) -> Result<f64> {
    let policy = GatewayPolicy::by_latency(open, tables)?;
    let latency: f64 = policy.assign.iter().enumerate().map(|(v, &j)| tables.latency(j, v)).sum();
    Ok(policy.open.len() as f64 + cfg.alpha * latency)
}

/// `sum_v max_{j in open} r_sat(j, v)`.
pub fn gateway_utility(open: &[usize], tables: &PathTables) -> Result<f64> {
    let policy = GatewayPolicy::by_reliability(open, tables)?;
    Ok(policy.assign.iter().enumerate().map(|(v, &j)| tables.r_sat(j, v)).sum())
}

/// Upper bound on [`gateway_cost`] over every non-empty gateway set: all
/// candidates opened, each node paying its worst candidate latency.
pub fn gateway_cost_upper_bound(tables: &PathTables, cfg: &ObjectiveConfig) -> f64 {
    let worst: f64 = (0..tables.node_count())
        .map(|v| tables.gateways().iter().map(|&j| tables.latency(j, v)).fold(0.0, f64::max))
        .sum();
    tables.gateways().len() as f64 + cfg.alpha * worst
}

/// Non-negative submodular complement `bound - gateway_cost(open)`.
pub fn gateway_cost_complement(open: &[usize], tables: &PathTables, cfg: &ObjectiveConfig) -> Result<f64> {
    Ok(gateway_cost_upper_bound(tables, cfg) - gateway_cost(open, tables, cfg)?)
}

/// The four parts of the controller cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerCost {
    /// Node-to-controller latency under the latency-induced assignment.
    pub c1: f64,
    /// Pairwise inter-controller latency over ordered pairs.
    pub c2: f64,
    /// Load-proportional synchronisation over ordered pairs.
    pub c3: f64,
    /// Controller-to-assigned-gateway latency.
    pub c4: f64,
    /// `c1 + beta * (c2 + c3 + c4)`.
    pub total: f64,
}

impl ControllerCost {
    pub fn sync(&self) -> f64 {
        self.c2 + self.c3 + self.c4
    }
}

pub fn controller_cost_breakdown(
    open: &[usize],
    gw: &GatewayPolicy,
    tables: &PathTables,
    cfg: &ObjectiveConfig,
) -> Result<ControllerCost> {
    let policy = ControllerPolicy::by_latency(open, tables)?;
    let c1: f64 = policy.assign.iter().enumerate().map(|(v, &k)| tables.latency(k, v)).sum();
    let mut c2 = 0.0;
    let mut c3 = 0.0;
    let loads = policy.loads();
    for (a, &m) in policy.open.iter().enumerate() {
        for &n in &policy.open {
            if m != n {
                c2 += tables.latency(m, n);
                c3 += cfg.l_con * loads[a] as f64;
            }
        }
    }
    let c4: f64 = policy.open.iter().map(|&m| tables.latency(gw.assign[m], m)).sum();
    Ok(ControllerCost { c1, c2, c3, c4, total: c1 + cfg.beta * (c2 + c3 + c4) })
}

/// Controller latency plus weighted synchronisation cost, with the gateway
/// policy fixed.
pub fn controller_cost(open: &[usize], gw: &GatewayPolicy, tables: &PathTables, cfg: &ObjectiveConfig) -> Result<f64> {
    Ok(controller_cost_breakdown(open, gw, tables, cfg)?.total)
}

/// Upper bound on [`controller_cost`] over every non-empty controller set.
pub fn controller_cost_upper_bound(gw: &GatewayPolicy, tables: &PathTables, cfg: &ObjectiveConfig) -> f64 {
    let ks = tables.controllers();
    let c1: f64 = (0..tables.node_count())
        .map(|v| ks.iter().map(|&k| tables.latency(k, v)).fold(0.0, f64::max))
        .sum();
    let mut c2 = 0.0;
    for &m in ks {
        for &n in ks {
            if m != n {
                c2 += tables.latency(m, n);
            }
        }
    }
    let c3 = cfg.l_con * tables.node_count() as f64 * (ks.len() as f64 - 1.0);
    let c4: f64 = ks.iter().map(|&m| tables.latency(gw.assign[m], m)).sum();
    c1 + cfg.beta * (c2 + c3 + c4)
}

pub fn controller_cost_complement(
    open: &[usize],
    gw: &GatewayPolicy,
    tables: &PathTables,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    Ok(controller_cost_upper_bound(gw, tables, cfg) - controller_cost(open, gw, tables, cfg)?)
}

/// `sum_v max_{k in open} r_ctl(k, v)`.
pub fn controller_utility(open: &[usize], tables: &PathTables) -> Result<f64> {
    let policy = ControllerPolicy::by_reliability(open, tables)?;
    Ok(policy.assign.iter().enumerate().map(|(v, &k)| tables.r_ctl(k, v)).sum())
}

/// Average node reliability toward the satellite plus toward the controller
/// plane, under the policies' own assignments.
pub fn joint_utility(gw: &GatewayPolicy, ctl: &ControllerPolicy, tables: &PathTables) -> Result<f64> {
    if gw.open.is_empty() || ctl.open.is_empty() {
        return Err(Error::EmptyPolicy);
    }
    let n = tables.node_count();
    if gw.assign.len() != n || ctl.assign.len() != n {
        return Err(Error::invalid("policy assignment does not cover every node"));
    }
    let g: f64 = gw.assign.iter().enumerate().map(|(v, &j)| tables.r_sat(j, v)).sum();
    let c: f64 = ctl.assign.iter().enumerate().map(|(v, &k)| tables.r_ctl(k, v)).sum();
    Ok((g + c) / n as f64)
}

/// The composite cost: gateway count and latency plus `psi` times the
/// controller block.
pub fn joint_cost(gw: &GatewayPolicy, ctl_open: &[usize], tables: &PathTables, cfg: &ObjectiveConfig) -> Result<f64> {
    let g = gateway_cost(&gw.open, tables, cfg)?;
    let c = controller_cost(ctl_open, gw, tables, cfg)?;
    Ok(g + cfg.psi * c)
}
