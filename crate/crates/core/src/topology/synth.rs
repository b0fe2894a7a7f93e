use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{haversine_km, link_latency_ms, Link, Node, SatelliteLink, Topology};

/// A random connected topology: `n` nodes scattered over a continental
/// bounding box, a random spanning tree, plus up to `extra_links` chords.
/// Lengths are great-circle distances; every node is a candidate for both
/// facility types and all failure probabilities are zero.
pub fn random_topology(n: usize, extra_links: usize, seed: u64) -> Topology {
    assert!(n >= 1, "need at least one node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Node> = (0..n)
        .map(|id| Node {
            id,
            name: format!("v{id}"),
            lat: rng.gen_range(25.0..50.0),
            lon: rng.gen_range(-125.0..-65.0),
            gateway_candidate: true,
            controller_candidate: true,
            failure_prob: 0.0,
        })
        .collect();
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.gen_range(0..v), v));
    }
    let max_links = n * (n - 1) / 2;
    let mut attempts = 0;
    while pairs.len() < (n - 1 + extra_links).min(max_links) && attempts < 100 * (extra_links + 1) {
        attempts += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&key) {
            pairs.push(key);
        }
    }
    let links = pairs
        .into_iter()
        .map(|(u, v)| {
            let length_km = haversine_km(nodes[u].location(), nodes[v].location());
            Link { u, v, length_km, latency_ms: link_latency_ms(length_km).expect("non-negative"), failure_prob: 0.0 }
        })
        .collect();
    Topology::new(nodes, links, SatelliteLink::default()).expect("spanning tree keeps the graph connected")
}
