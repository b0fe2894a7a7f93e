//! Annotated terrestrial topologies: nodes with coordinates and candidate
//! flags, fibre links with latency, per-component failure probabilities and
//! the single gateway-to-satellite hop.

mod graphml;
pub mod registry;
mod synth;

use std::collections::{HashSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graphml::{load_graphml, load_graphml_with, GraphmlOptions, MissingCoords};
pub use synth::random_topology;

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Propagation speed of light in fibre, roughly two thirds of c.
pub const SIGNAL_SPEED_KM_S: f64 = 200_000.0;

/// One-way GEO hop delay applied to every gateway-to-satellite link.
pub const DEFAULT_SAT_HOP_DELAY_MS: f64 = 125.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Great-circle distance in km on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Propagation latency of a fibre span at [`SIGNAL_SPEED_KM_S`].
pub fn link_latency_ms(length_km: f64) -> Result<f64> {
    link_latency_ms_at(length_km, SIGNAL_SPEED_KM_S)
}

pub fn link_latency_ms_at(length_km: f64, speed_km_s: f64) -> Result<f64> {
    if !(length_km >= 0.0) || !length_km.is_finite() {
        return Err(Error::invalid(format!("link length must be a finite non-negative number, got {length_km}")));
    }
    if !(speed_km_s > 0.0) || !speed_km_s.is_finite() {
        return Err(Error::invalid(format!("signal speed must be positive, got {speed_km_s}")));
    }
    Ok(length_km / speed_km_s * 1000.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    #[serde(rename = "gw")]
    pub gateway_candidate: bool,
    #[serde(rename = "ctl")]
    pub controller_candidate: bool,
    #[serde(rename = "p")]
    pub failure_prob: f64,
}

impl Node {
    pub fn location(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub u: usize,
    pub v: usize,
    #[serde(rename = "len_km")]
    pub length_km: f64,
    #[serde(rename = "lat_ms")]
    pub latency_ms: f64,
    #[serde(rename = "p")]
    pub failure_prob: f64,
}

/// The gateway-to-satellite hop shared by every gateway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteLink {
    #[serde(rename = "p")]
    pub failure_prob: f64,
    pub delay_ms: f64,
}

impl Default for SatelliteLink {
    fn default() -> Self {
        SatelliteLink { failure_prob: 0.0, delay_ms: DEFAULT_SAT_HOP_DELAY_MS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopologyDoc {
    nodes: Vec<Node>,
    links: Vec<Link>,
    sat: SatelliteLink,
}

/// A validated, connected, undirected terrestrial network.
///
/// Values are immutable once built; operations that change probabilities or
/// candidate sets return a new topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    sat: SatelliteLink,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl TryFrom<TopologyDoc> for Topology {
    type Error = Error;

    fn try_from(doc: TopologyDoc) -> Result<Self> {
        Topology::new(doc.nodes, doc.links, doc.sat)
    }
}

impl From<Topology> for TopologyDoc {
    fn from(t: Topology) -> Self {
        TopologyDoc { nodes: t.nodes, links: t.links, sat: t.sat }
    }
}

fn check_prob(what: &str, p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what}: failure probability {p} outside [0, 1)")))
    }
}

impl Topology {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>, sat: SatelliteLink) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("topology has no nodes"));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::invalid(format!(
                    "node ids must be contiguous from 0, found id {} at position {i}",
                    node.id
                )));
            }
            if !node.location().is_valid() {
                return Err(Error::invalid(format!(
                    "node `{}` has coordinates out of range ({}, {})",
                    node.name, node.lat, node.lon
                )));
            }
            check_prob(&format!("node `{}`", node.name), node.failure_prob)?;
        }
        let n = nodes.len();
        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (idx, link) in links.iter().enumerate() {
            if link.u >= n || link.v >= n {
                return Err(Error::invalid(format!("link {}-{} references an unknown node", link.u, link.v)));
            }
            if link.u == link.v {
                return Err(Error::invalid(format!("self-loop on node {}", link.u)));
            }
            if !seen.insert((link.u.min(link.v), link.u.max(link.v))) {
                return Err(Error::invalid(format!("duplicate link {}-{}", link.u, link.v)));
            }
            if !(link.length_km >= 0.0 && link.length_km.is_finite()) {
                return Err(Error::invalid(format!("link {}-{} has invalid length", link.u, link.v)));
            }
            if !(link.latency_ms >= 0.0 && link.latency_ms.is_finite()) {
                return Err(Error::invalid(format!("link {}-{} has invalid latency", link.u, link.v)));
            }
            check_prob(&format!("link {}-{}", link.u, link.v), link.failure_prob)?;
            adjacency[link.u].push((link.v, idx));
            adjacency[link.v].push((link.u, idx));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        check_prob("satellite link", sat.failure_prob)?;
        if !(sat.delay_ms >= 0.0 && sat.delay_ms.is_finite()) {
            return Err(Error::invalid("satellite hop delay must be non-negative"));
        }

        let topo = Topology { nodes, links, sat, adjacency };
        let components = topo.components();
        if components.len() > 1 {
            let named = components
                .into_iter()
                .map(|c| c.into_iter().map(|v| topo.nodes[v].name.clone()).collect())
                .collect();
            return Err(Error::Disconnected(named));
        }
        if topo.gateway_candidates().is_empty() {
            return Err(Error::invalid("gateway candidate set is empty"));
        }
        if topo.controller_candidates().is_empty() {
            return Err(Error::invalid("controller candidate set is empty"));
        }
        Ok(topo)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn sat(&self) -> SatelliteLink {
        self.sat
    }

    /// `(neighbour, link index)` pairs sorted by neighbour id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn link_between(&self, u: usize, v: usize) -> Option<&Link> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|pos| &self.links[self.adjacency[u][pos].1])
    }

    pub fn gateway_candidates(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.gateway_candidate).map(|n| n.id).collect()
    }

    pub fn controller_candidates(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.controller_candidate).map(|n| n.id).collect()
    }

    /// Restrict the gateway candidate set to `ids`.
    pub fn with_gateway_candidates(&self, ids: &[usize]) -> Result<Self> {
        self.with_candidates(ids, |n, on| n.gateway_candidate = on)
    }

    /// Restrict the controller candidate set to `ids`.
    pub fn with_controller_candidates(&self, ids: &[usize]) -> Result<Self> {
        self.with_candidates(ids, |n, on| n.controller_candidate = on)
    }

    fn with_candidates(&self, ids: &[usize], set: impl Fn(&mut Node, bool)) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid("candidate set must be non-empty"));
        }
        let mut out = self.clone();
        for node in &mut out.nodes {
            set(node, false);
        }
        for &id in ids {
            let node = out
                .nodes
                .get_mut(id)
                .ok_or_else(|| Error::invalid(format!("candidate id {id} out of range")))?;
            set(node, true);
        }
        Ok(out)
    }

    pub fn with_sat_delay_ms(&self, delay_ms: f64) -> Result<Self> {
        if !(delay_ms >= 0.0 && delay_ms.is_finite()) {
            return Err(Error::invalid("satellite hop delay must be non-negative"));
        }
        let mut out = self.clone();
        out.sat.delay_ms = delay_ms;
        Ok(out)
    }

    /// Replace every failure probability. Slices are indexed by node id and
    /// link index respectively.
    pub fn with_failure_probs(&self, node_p: &[f64], link_p: &[f64], sat_p: f64) -> Result<Self> {
        if node_p.len() != self.nodes.len() || link_p.len() != self.links.len() {
            return Err(Error::invalid("failure probability vectors have the wrong length"));
        }
        let mut out = self.clone();
        for (node, &p) in out.nodes.iter_mut().zip(node_p) {
            check_prob(&format!("node `{}`", node.name), p)?;
            node.failure_prob = p;
        }
        for (link, &p) in out.links.iter_mut().zip(link_p) {
            check_prob(&format!("link {}-{}", link.u, link.v), p)?;
            link.failure_prob = p;
        }
        check_prob("satellite link", sat_p)?;
        out.sat.failure_prob = sat_p;
        Ok(out)
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &self.adjacency[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Load a topology from a registry name, a native JSON file or a GraphML
/// file (by extension).
pub fn load_topology(name_or_path: &str) -> Result<Topology> {
    if let Some(topo) = registry::get(name_or_path) {
        return topo;
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::UnknownTopology(name_or_path.to_string()));
    }
    let bytes = std::fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => Topology::from_json(std::str::from_utf8(&bytes).map_err(|e| Error::invalid(e.to_string()))?),
        _ => load_graphml(&bytes),
    }
}

/// Uniform failure-probability ranges for nodes, links and the satellite hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureCase {
    pub case_id: u8,
    pub node_range: (f64, f64),
    pub link_range: (f64, f64),
    pub sat_range: (f64, f64),
}

impl FailureCase {
    pub const ALL: [FailureCase; 4] = [
        FailureCase { case_id: 1, node_range: (0.0, 0.05), link_range: (0.0, 0.02), sat_range: (0.0, 0.02) },
        FailureCase { case_id: 2, node_range: (0.0, 0.06), link_range: (0.0, 0.04), sat_range: (0.0, 0.03) },
        FailureCase { case_id: 3, node_range: (0.0, 0.07), link_range: (0.0, 0.06), sat_range: (0.0, 0.04) },
        FailureCase { case_id: 4, node_range: (0.0, 0.08), link_range: (0.0, 0.08), sat_range: (0.0, 0.05) },
    ];

    pub fn builtin(case_id: u8) -> Result<Self> {
        match case_id {
            1..=4 => Ok(Self::ALL[case_id as usize - 1]),
            _ => Err(Error::invalid(format!("failure case must be 1..4, got {case_id}"))),
        }
    }
}

/// Draw every failure probability uniformly from `case`'s ranges.
///
/// Draw order is nodes by id, links by index, then the satellite hop, so a
/// given seed always produces the same assignment.
pub fn sample_failures(topo: &Topology, case: &FailureCase, seed: u64) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let mut out = topo.clone();
    for node in &mut out.nodes {
        node.failure_prob = draw(case.node_range);
    }
    for link in &mut out.links {
        link.failure_prob = draw(case.link_range);
    }
    out.sat.failure_prob = draw(case.sat_range);
    out
}
