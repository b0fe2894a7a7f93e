//! Fixtures shared by the criterion benchmarks under `benches/`.

use sagin_core::objectives::{GatewayPolicy, ObjectiveConfig};
use sagin_core::paths::{build_reliability_tables, PathTables};
use sagin_core::solvers::{solve_gateway_latency, Method, SolverOptions};
use sagin_core::topology::{load_topology, sample_failures, FailureCase};

/// Path tables for a bundled network with Case 1 failure probabilities.
pub fn tables(name: &str, seed: u64) -> PathTables {
    let topo = load_topology(name).expect("bundled topology");
    let topo = sample_failures(&topo, &FailureCase::ALL[0], seed);
    build_reliability_tables(&topo, 1).expect("connected topology")
}

/// Latency-optimal gateways found by the approximate solver.
pub fn gateways(tables: &PathTables, cfg: &ObjectiveConfig) -> GatewayPolicy {
    solve_gateway_latency(tables, cfg, Method::Approx, &SolverOptions::default()).expect("non-empty ground set").0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_cover_every_node() {
        let t = tables("Nsfnet", 1);
        assert_eq!(t.node_count(), 13);
        assert_eq!(gateways(&t, &ObjectiveConfig::default()).assign.len(), 13);
    }
}
