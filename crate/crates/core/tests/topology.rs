use proptest::prelude::*;
use sagin_core::topology::{
    haversine_km, load_graphml, load_topology, random_topology, registry, sample_failures, FailureCase, LatLon,
};
use sagin_core::Error;

const ZOO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/topology_zoo");

fn zoo_bytes(name: &str) -> Vec<u8> {
    std::fs::read(format!("{ZOO}/{name}.graphml")).unwrap()
}

#[test]
fn nsfnet_and_tinet_sizes() {
    let nsf = load_graphml(&zoo_bytes("Nsfnet")).unwrap();
    assert_eq!((nsf.node_count(), nsf.link_count()), (13, 15));
    let tinet = load_topology("Tinet").unwrap();
    assert_eq!((tinet.node_count(), tinet.link_count()), (53, 89));
}

#[test]
fn strict_loader_names_unlocated_node() {
    match load_graphml(&zoo_bytes("Tinet")) {
        Err(Error::MissingCoordinates(name)) => assert!(!name.is_empty()),
        other => panic!("expected missing coordinates, got {other:?}"),
    }
}

#[test]
fn coincident_endpoints_have_zero_length() {
    let doc = r#"<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key attr.name="Latitude" attr.type="double" for="node" id="d0"/>
  <key attr.name="Longitude" attr.type="double" for="node" id="d1"/>
  <graph edgedefault="undirected">
    <node id="0"><data key="d0">0</data><data key="d1">0</data></node>
    <node id="1"><data key="d0">0</data><data key="d1">0</data></node>
    <edge source="0" target="1"/>
  </graph>
</graphml>"#;
    let t = load_graphml(doc.as_bytes()).unwrap();
    assert_eq!(t.links()[0].length_km, 0.0);
    assert_eq!(t.links()[0].latency_ms, 0.0);
}

#[test]
fn every_bundled_network_is_connected_with_candidates() {
    for name in registry::names() {
        let t = load_topology(name).unwrap();
        assert_eq!(t.gateway_candidates().len(), t.node_count(), "{name}");
        assert_eq!(t.controller_candidates().len(), t.node_count(), "{name}");
        assert!(t.links().iter().all(|l| l.latency_ms >= 0.0 && (l.latency_ms - l.length_km / 200.0).abs() < 1e-9));
    }
}

/// Independent haversine with the textbook atan2 form.
fn reference_haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let dp = p2 - p1;
    let dl = (b.1 - a.1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    6371.0 * 2.0 * h.sqrt().atan2((1.0 - h).sqrt())
}

fn coord() -> impl Strategy<Value = (f64, f64)> {
    (-90.0..=90.0f64, -180.0..=180.0f64)
}

proptest! {
    #[test]
    fn haversine_symmetric_and_nonnegative(a in coord(), b in coord()) {
        let (pa, pb) = (LatLon::new(a.0, a.1), LatLon::new(b.0, b.1));
        let d = haversine_km(pa, pb);
        prop_assert!(d >= 0.0);
        prop_assert!((d - haversine_km(pb, pa)).abs() < 1e-9);
        prop_assert!(d <= std::f64::consts::PI * 6371.0 + 1e-6);
        prop_assert!((d - reference_haversine(a, b)).abs() < 1e-6);
    }

    #[test]
    fn haversine_triangle_inequality(a in coord(), b in coord(), c in coord()) {
        let (pa, pb, pc) = (LatLon::new(a.0, a.1), LatLon::new(b.0, b.1), LatLon::new(c.0, c.1));
        prop_assert!(haversine_km(pa, pc) <= haversine_km(pa, pb) + haversine_km(pb, pc) + 1e-6);
    }

    #[test]
    fn sampled_probabilities_stay_in_case_ranges(seed in any::<u64>(), case in 1u8..=4) {
        let t = random_topology(12, 6, seed % 1000);
        let fc = FailureCase::builtin(case).unwrap();
        let s = sample_failures(&t, &fc, seed);
        prop_assert!(s.nodes().iter().all(|n| n.failure_prob >= 0.0 && n.failure_prob <= fc.node_range.1));
        prop_assert!(s.links().iter().all(|l| l.failure_prob >= 0.0 && l.failure_prob <= fc.link_range.1));
        prop_assert!(s.sat().failure_prob >= 0.0 && s.sat().failure_prob <= fc.sat_range.1);
        prop_assert_eq!(s.clone(), sample_failures(&t, &fc, seed));
    }
}

#[test]
fn table_of_failure_cases() {
    let expect = [(0.05, 0.02, 0.02), (0.06, 0.04, 0.03), (0.07, 0.06, 0.04), (0.08, 0.08, 0.05)];
    for (i, (v, e, s)) in expect.into_iter().enumerate() {
        let c = FailureCase::builtin(i as u8 + 1).unwrap();
        assert_eq!((c.node_range, c.link_range, c.sat_range), ((0.0, v), (0.0, e), (0.0, s)));
    }
    assert!(FailureCase::builtin(0).is_err());
    assert!(FailureCase::builtin(5).is_err());
}
