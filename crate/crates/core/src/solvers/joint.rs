//! Two-stage placement: gateways first, then controllers with the gateway
//! policy held fixed.

use serde::{Deserialize, Serialize};

use super::{double_greedy_restarts, exact_enumerate, threshold_greedy, FacilityOracle, SolveResult};
use crate::error::{Error, Result};
use crate::objectives::{
    controller_cost_breakdown, controller_utility, gateway_cost, gateway_utility, joint_cost, joint_utility,
    ControllerCost, ControllerPolicy, GatewayPolicy, ObjectiveConfig,
};
use crate::paths::PathTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointMode {
    /// Budgeted reliability maximisation for both stages.
    Reliability,
    /// Unbudgeted minimisation of gateway latency cost, then of controller
    /// latency plus synchronisation overhead.
    LatencyOverhead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Approx,
    Exact,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "approx" => Ok(Method::Approx),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::invalid(format!("unknown method '{s}' (expected approx or exact)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Approx => "approx",
            Method::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Threshold decay for the budgeted greedy.
    pub epsilon: f64,
    /// Independent double greedy passes.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { epsilon: 0.1, restarts: 100, seed: 0 }
    }
}

/// Every metric of a gateway and controller policy pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMetrics {
    pub gateway_count: usize,
    pub controller_count: usize,
    pub gateway_cost: f64,
    pub gateway_utility: f64,
    pub controller_cost: ControllerCost,
    pub controller_utility: f64,
    pub joint_cost: f64,
    pub joint_utility: f64,
    pub avg_gateway_latency_ms: f64,
    pub avg_controller_latency_ms: f64,
    pub avg_gateway_reliability: f64,
    pub avg_controller_reliability: f64,
}

impl JointMetrics {
    pub fn compute(
        gw: &GatewayPolicy,
        ctl: &ControllerPolicy,
        tables: &PathTables,
        cfg: &ObjectiveConfig,
    ) -> Result<Self> {
        Ok(JointMetrics {
            gateway_count: gw.open.len(),
            controller_count: ctl.open.len(),
            gateway_cost: gateway_cost(&gw.open, tables, cfg)?,
            gateway_utility: gateway_utility(&gw.open, tables)?,
            controller_cost: controller_cost_breakdown(&ctl.open, gw, tables, cfg)?,
            controller_utility: controller_utility(&ctl.open, tables)?,
            joint_cost: joint_cost(gw, &ctl.open, tables, cfg)?,
            joint_utility: joint_utility(gw, ctl, tables)?,
            avg_gateway_latency_ms: gw.avg_latency_ms(tables),
            avg_controller_latency_ms: ctl.avg_latency_ms(tables),
            avg_gateway_reliability: gw.avg_reliability(tables),
            avg_controller_reliability: ctl.avg_reliability(tables),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSolution {
    pub mode: JointMode,
    pub method: Method,
    pub gateway: GatewayPolicy,
    pub controller: ControllerPolicy,
    /// Stage results; `value` is the maximised function (utility or cost
    /// complement).
    pub gateway_result: SolveResult,
    pub controller_result: SolveResult,
    pub metrics: JointMetrics,
}

fn unbudgeted(oracle: &FacilityOracle, method: Method, opts: &SolverOptions) -> Result<SolveResult> {
    match method {
        Method::Approx => double_greedy_restarts(oracle, opts.seed, opts.restarts),
        Method::Exact => exact_enumerate(oracle, None),
    }
}

fn budgeted(oracle: &FacilityOracle, budget: usize, method: Method, opts: &SolverOptions) -> Result<SolveResult> {
    match method {
        Method::Approx => threshold_greedy(oracle, budget, opts.epsilon),
        Method::Exact => exact_enumerate(oracle, Some(budget)),
    }
}

/// Minimise the gateway latency cost over all non-empty gateway sets.
pub fn solve_gateway_latency(
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    method: Method,
    opts: &SolverOptions,
) -> Result<(GatewayPolicy, SolveResult)> {
    let result = unbudgeted(&FacilityOracle::gateway_complement(tables, cfg), method, opts)?;
    Ok((GatewayPolicy::by_latency(&result.open, tables)?, result))
}

/// Maximise gateway reliability with at most `cfg.g_max` gateways.
pub fn solve_gateway_reliability(
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    method: Method,
    opts: &SolverOptions,
) -> Result<(GatewayPolicy, SolveResult)> {
    let result = budgeted(&FacilityOracle::gateway_utility(tables), cfg.g_max, method, opts)?;
    Ok((GatewayPolicy::by_reliability(&result.open, tables)?, result))
}

/// Minimise controller latency plus synchronisation overhead for a fixed
/// gateway policy.
pub fn solve_controller_overhead(
    gw: &GatewayPolicy,
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    method: Method,
    opts: &SolverOptions,
) -> Result<(ControllerPolicy, SolveResult)> {
    let result = unbudgeted(&FacilityOracle::controller_complement(gw, tables, cfg), method, opts)?;
    Ok((ControllerPolicy::by_latency(&result.open, tables)?, result))
}

/// Maximise control-path reliability with at most `cfg.k_max` controllers.
pub fn solve_controller_reliability(
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    method: Method,
    opts: &SolverOptions,
) -> Result<(ControllerPolicy, SolveResult)> {
    let result = budgeted(&FacilityOracle::controller_utility(tables), cfg.k_max, method, opts)?;
    Ok((ControllerPolicy::by_reliability(&result.open, tables)?, result))
}

/// Sequential two-stage solve. The controller weight `psi` only scales the
/// second stage, so it has no effect on either argmin.
pub fn solve_joint(
    tables: &PathTables,
    cfg: &ObjectiveConfig,
    mode: JointMode,
    method: Method,
    opts: &SolverOptions,
) -> Result<JointSolution> {
    cfg.validate(tables)?;
    let (gateway, gateway_result, controller, controller_result) = match mode {
        JointMode::Reliability => {
            let (gw, gr) = solve_gateway_reliability(tables, cfg, method, opts)?;
            let (ctl, cr) = solve_controller_reliability(tables, cfg, method, opts)?;
            (gw, gr, ctl, cr)
        }
        JointMode::LatencyOverhead => {
            let (gw, gr) = solve_gateway_latency(tables, cfg, method, opts)?;
            let (ctl, cr) = solve_controller_overhead(&gw, tables, cfg, method, opts)?;
            (gw, gr, ctl, cr)
        }
    };
    let metrics = JointMetrics::compute(&gateway, &controller, tables, cfg)?;
    Ok(JointSolution { mode, method, gateway, controller, gateway_result, controller_result, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::build_reliability_tables;
    use crate::topology::{random_topology, sample_failures, FailureCase};

    #[test]
    fn zero_failures_give_full_reliability() {
        let t = random_topology(10, 4, 1);
        let tables = build_reliability_tables(&t, 1).unwrap();
        let cfg = ObjectiveConfig { g_max: 3, k_max: 3, ..Default::default() };
        for method in [Method::Approx, Method::Exact] {
            let s = solve_joint(&tables, &cfg, JointMode::Reliability, method, &SolverOptions::default()).unwrap();
            assert_eq!(s.metrics.joint_utility, 2.0);
        }
    }

    #[test]
    fn exact_dominates_approx_per_stage() {
        for seed in 0..5 {
            let t = sample_failures(&random_topology(11, 5, seed), &FailureCase::ALL[2], seed);
            let tables = build_reliability_tables(&t, 1).unwrap();
            let cfg = ObjectiveConfig { g_max: 3, k_max: 2, ..Default::default() };
            let opts = SolverOptions { seed, restarts: 20, ..Default::default() };
            for mode in [JointMode::Reliability, JointMode::LatencyOverhead] {
                let a = solve_joint(&tables, &cfg, mode, Method::Approx, &opts).unwrap();
                let e = solve_joint(&tables, &cfg, mode, Method::Exact, &opts).unwrap();
                assert!(a.gateway_result.value <= e.gateway_result.value + 1e-9);
                if mode == JointMode::Reliability {
                    assert!(a.controller_result.value <= e.controller_result.value + 1e-9);
                    assert!(a.gateway.open.len() <= 3 && a.controller.open.len() <= 2);
                }
            }
        }
    }

    #[test]
    fn metrics_match_stage_values() {
        let t = sample_failures(&random_topology(9, 3, 8), &FailureCase::ALL[0], 8);
        let tables = build_reliability_tables(&t, 1).unwrap();
        let cfg = ObjectiveConfig { g_max: 2, k_max: 2, ..Default::default() };
        let s = solve_joint(&tables, &cfg, JointMode::Reliability, Method::Exact, &SolverOptions::default()).unwrap();
        assert!((s.metrics.gateway_utility - s.gateway_result.value).abs() < 1e-9);
        assert!((s.metrics.controller_utility - s.controller_result.value).abs() < 1e-9);
        let n = tables.node_count() as f64;
        assert!((s.metrics.joint_utility - (s.metrics.gateway_utility + s.metrics.controller_utility) / n).abs() < 1e-12);
    }
}
