use proptest::prelude::*;
use sagin_core::objectives::{
    controller_cost, controller_cost_breakdown, controller_cost_complement, controller_utility, gateway_cost,
    gateway_cost_complement, gateway_utility, joint_utility, ControllerPolicy, GatewayPolicy, ObjectiveConfig,
};
use sagin_core::paths::{build_reliability_tables, PathTables};
use sagin_core::solvers::{exact_enumerate, FacilityOracle};
use sagin_core::topology::{random_topology, sample_failures, FailureCase, Link, Node, SatelliteLink, Topology};

fn instance(n: usize, seed: u64, case: usize) -> PathTables {
    let t = sample_failures(&random_topology(n, n / 2, seed), &FailureCase::ALL[case], seed);
    build_reliability_tables(&t, 1).unwrap()
}

fn subset(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Every assignment of `n` nodes to members of `open`, as index vectors.
fn assignments(open: &[usize], n: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total = open.len().pow(n as u32);
    (0..total).map(move |mut code| {
        (0..n)
            .map(|_| {
                let f = open[code % open.len()];
                code /= open.len();
                f
            })
            .collect()
    })
}

fn brute_gateway_cost(open: &[usize], t: &PathTables, cfg: &ObjectiveConfig) -> f64 {
    assignments(open, t.node_count())
        .map(|a| open.len() as f64 + cfg.alpha * a.iter().enumerate().map(|(v, &j)| t.latency(j, v)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn brute_utility(open: &[usize], n: usize, r: impl Fn(usize, usize) -> f64) -> f64 {
    assignments(open, n).map(|a| a.iter().enumerate().map(|(v, &j)| r(j, v)).sum::<f64>()).fold(0.0, f64::max)
}

fn brute_controller_cost(open: &[usize], gw: &GatewayPolicy, t: &PathTables, cfg: &ObjectiveConfig) -> f64 {
    let n = t.node_count();
    assignments(open, n)
        .map(|a| {
            let c1: f64 = a.iter().enumerate().map(|(v, &k)| t.latency(k, v)).sum();
            let mut c2 = 0.0;
            let mut c3 = 0.0;
            for &m in open {
                let load = a.iter().filter(|&&k| k == m).count() as f64;
                for &o in open {
                    if m != o {
                        c2 += t.latency(m, o);
                        c3 += cfg.l_con * load;
                    }
                }
            }
            let c4: f64 = open.iter().map(|&m| t.latency(gw.assign[m], m)).sum();
            c1 + cfg.beta * (c2 + c3 + c4)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn alpha_zero_counts_gateways() {
    let t = instance(9, 4, 0);
    let cfg = ObjectiveConfig { alpha: 0.0, ..Default::default() };
    for mask in 1..512u32 {
        let open = subset(mask, 9);
        assert_eq!(gateway_cost(&open, &t, &cfg).unwrap(), open.len() as f64);
    }
}

#[test]
fn complements_are_non_negative_on_ten_nodes() {
    for seed in 0..3 {
        let t = instance(10, seed, seed as usize);
        let cfg = ObjectiveConfig { alpha: 0.3, beta: 0.5, ..Default::default() };
        let gw = GatewayPolicy::by_latency(&[0, 5], &t).unwrap();
        for mask in 1..1024u32 {
            let open = subset(mask, 10);
            assert!(gateway_cost_complement(&open, &t, &cfg).unwrap() >= -1e-9);
            assert!(controller_cost_complement(&open, &gw, &t, &cfg).unwrap() >= -1e-9);
        }
    }
}

#[test]
fn complement_maximiser_minimises_cost() {
    let t = instance(8, 21, 1);
    let cfg = ObjectiveConfig { alpha: 0.2, beta: 0.4, ..Default::default() };
    let gw = GatewayPolicy::by_latency(&[1, 6], &t).unwrap();
    let min_cost = |f: &dyn Fn(&[usize]) -> f64| (1..256u32).map(|m| f(&subset(m, 8))).fold(f64::INFINITY, f64::min);

    let best = exact_enumerate(&FacilityOracle::gateway_complement(&t, &cfg), None).unwrap();
    let lowest = min_cost(&|s| gateway_cost(s, &t, &cfg).unwrap());
    assert!((gateway_cost(&best.open, &t, &cfg).unwrap() - lowest).abs() < 1e-9);

    let best = exact_enumerate(&FacilityOracle::controller_complement(&gw, &t, &cfg), None).unwrap();
    let lowest = min_cost(&|s| controller_cost(s, &gw, &t, &cfg).unwrap());
    assert!((controller_cost(&best.open, &gw, &t, &cfg).unwrap() - lowest).abs() < 1e-9);
}

fn line_tables(n: usize) -> PathTables {
    let nodes = (0..n)
        .map(|id| Node {
            id,
            name: format!("v{id}"),
            lat: 0.0,
            lon: id as f64,
            gateway_candidate: true,
            controller_candidate: true,
            failure_prob: 0.0,
        })
        .collect();
    let links = (1..n).map(|v| Link { u: v - 1, v, length_km: 200.0, latency_ms: 1.0, failure_prob: 0.0 }).collect();
    build_reliability_tables(&Topology::new(nodes, links, SatelliteLink::default()).unwrap(), 1).unwrap()
}

#[test]
fn synchronisation_term_follows_loads() {
    // five nodes on a line, controllers at both ends: loads 3 and 2
    let t = line_tables(5);
    let cfg = ObjectiveConfig { l_con: 0.1, beta: 2.0, ..Default::default() };
    let gw = GatewayPolicy::by_latency(&[2], &t).unwrap();
    let ctl = ControllerPolicy::by_latency(&[0, 4], &t).unwrap();
    assert_eq!(ctl.loads(), vec![3, 2]);
    let c = controller_cost_breakdown(&[0, 4], &gw, &t, &cfg).unwrap();
    assert!((c.c3 - 0.1 * 5.0).abs() < 1e-12);
    assert_eq!(c.c1, 0.0 + 1.0 + 2.0 + 1.0 + 0.0);
    assert_eq!(c.c2, 8.0);
    assert_eq!(c.c4, 4.0);
    assert!((c.total - (4.0 + 2.0 * (8.0 + 0.5 + 4.0))).abs() < 1e-12);
}

#[test]
fn joint_utility_splits_into_stage_utilities() {
    for seed in 0..5 {
        let t = instance(11, seed, 3);
        let gw = GatewayPolicy::by_reliability(&[2, 7], &t).unwrap();
        let ctl = ControllerPolicy::by_reliability(&[0, 4, 9], &t).unwrap();
        let expect = (gateway_utility(&gw.open, &t).unwrap() + controller_utility(&ctl.open, &t).unwrap()) / 11.0;
        assert!((joint_utility(&gw, &ctl, &t).unwrap() - expect).abs() < 1e-12);
        assert!(joint_utility(&gw, &ctl, &t).unwrap() <= 2.0);
    }
}

fn small_instance() -> impl Strategy<Value = (usize, u64, usize, u32)> {
    (2usize..=5, 0u64..5000, 0usize..4).prop_flat_map(|(n, seed, case)| (Just(n), Just(seed), Just(case), 1u32..(1 << n)))
}

/// Random `A ⊆ B` plus an element outside `B`, all as subsets of `0..n`.
fn nested_triple(n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
    (1u32..(1 << n), any::<u32>(), 0..n).prop_filter_map("g must lie outside B", move |(a, extra, g)| {
        let b = a | (extra & ((1 << n) - 1));
        (b >> g & 1 == 0).then(|| (subset(a, n), subset(b, n), g))
    })
}

fn with(s: &[usize], g: usize) -> Vec<usize> {
    let mut v = s.to_vec();
    v.push(g);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn induced_assignment_matches_brute_force((n, seed, case, mask) in small_instance()) {
        let t = instance(n, seed, case);
        let cfg = ObjectiveConfig { alpha: 0.7, beta: 1.3, l_con: 0.2, ..Default::default() };
        let open = subset(mask, n);
        prop_assert_eq!(gateway_cost(&open, &t, &cfg).unwrap(), brute_gateway_cost(&open, &t, &cfg));
        prop_assert_eq!(gateway_utility(&open, &t).unwrap(), brute_utility(&open, n, |j, v| t.r_sat(j, v)));
        prop_assert_eq!(controller_utility(&open, &t).unwrap(), brute_utility(&open, n, |k, v| t.r_ctl(k, v)));
        let gw = GatewayPolicy::by_latency(&[seed as usize % n], &t).unwrap();
        let direct = controller_cost(&open, &gw, &t, &cfg).unwrap();
        prop_assert!((direct - brute_controller_cost(&open, &gw, &t, &cfg)).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn diminishing_returns(seed in 0u64..5000, case in 0usize..4, (a, b, g) in nested_triple(10)) {
        let t = instance(10, seed, case);
        let cfg = ObjectiveConfig { alpha: 0.5, beta: 0.8, ..Default::default() };
        let gw = GatewayPolicy::by_latency(&[3, 8], &t).unwrap();
        let tol = 1e-9;

        let gc = |s: &[usize]| gateway_cost(s, &t, &cfg).unwrap();
        prop_assert!(gc(&with(&a, g)) - gc(&a) <= gc(&with(&b, g)) - gc(&b) + tol);
        let cc = |s: &[usize]| controller_cost(s, &gw, &t, &cfg).unwrap();
        prop_assert!(cc(&with(&a, g)) - cc(&a) <= cc(&with(&b, g)) - cc(&b) + tol);
        let gu = |s: &[usize]| gateway_utility(s, &t).unwrap();
        prop_assert!(gu(&with(&a, g)) - gu(&a) >= gu(&with(&b, g)) - gu(&b) - tol);
        let cu = |s: &[usize]| controller_utility(s, &t).unwrap();
        prop_assert!(cu(&with(&a, g)) - cu(&a) >= cu(&with(&b, g)) - cu(&b) - tol);
        prop_assert!(gu(&b) >= gu(&a) && cu(&b) >= cu(&a));
    }
}
