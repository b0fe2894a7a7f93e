//! Topology Zoo flavoured GraphML ingestion.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{haversine_km, link_latency_ms_at, LatLon, Link, Node, SatelliteLink, Topology, SIGNAL_SPEED_KM_S};

/// What to do with nodes that carry no Latitude/Longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingCoords {
    /// Fail with the offending node's name.
    #[default]
    Reject,
    /// Drop unlocated leaves, then place every remaining unlocated node at
    /// the spherical centroid of its located neighbours (iterated until all
    /// are placed).
    Repair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphmlOptions {
    pub signal_speed_km_s: f64,
    pub sat_hop_delay_ms: f64,
    pub missing_coords: MissingCoords,
}

impl Default for GraphmlOptions {
    fn default() -> Self {
        GraphmlOptions {
            signal_speed_km_s: SIGNAL_SPEED_KM_S,
            sat_hop_delay_ms: super::DEFAULT_SAT_HOP_DELAY_MS,
            missing_coords: MissingCoords::Reject,
        }
    }
}

/// Parse a GraphML document with default options.
pub fn load_graphml(bytes: &[u8]) -> Result<Topology> {
    load_graphml_with(bytes, &GraphmlOptions::default())
}

struct RawNode {
    name: String,
    loc: Option<LatLon>,
}

pub fn load_graphml_with(bytes: &[u8], opts: &GraphmlOptions) -> Result<Topology> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Xml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(Error::Xml(format!("root element is <{}>, expected <graphml>", root.tag_name().name())));
    }

    // key id -> attr.name, split by domain
    let mut node_keys = HashMap::new();
    let mut edge_keys = HashMap::new();
    for key in root.children().filter(|n| n.has_tag_name("key")) {
        let (Some(id), Some(name)) = (key.attribute("id"), key.attribute("attr.name")) else {
            continue;
        };
        match key.attribute("for") {
            Some("node") => {
                node_keys.insert(id, name);
            }
            Some("edge") => {
                edge_keys.insert(id, name);
            }
            Some("all") | None => {
                node_keys.insert(id, name);
                edge_keys.insert(id, name);
            }
            _ => {}
        }
    }

    let graph = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| Error::Xml("document has no <graph> element".into()))?;

    let mut index_of = HashMap::new();
    let mut raw_nodes = Vec::new();
    for node in graph.children().filter(|n| n.has_tag_name("node")) {
        let id = node.attribute("id").ok_or_else(|| Error::Xml("<node> without id".into()))?;
        let (mut lat, mut lon, mut label) = (None, None, None);
        for data in node.children().filter(|n| n.has_tag_name("data")) {
            let value = data.text().unwrap_or("").trim();
            match data.attribute("key").and_then(|k| node_keys.get(k)).copied() {
                Some("Latitude") => lat = value.parse::<f64>().ok(),
                Some("Longitude") => lon = value.parse::<f64>().ok(),
                Some("label") => label = Some(value.to_string()),
                _ => {}
            }
        }
        if index_of.insert(id, raw_nodes.len()).is_some() {
            return Err(Error::Xml(format!("duplicate node id `{id}`")));
        }
        let loc = match (lat, lon) {
            (Some(lat), Some(lon)) => {
                let loc = LatLon::new(lat, lon);
                if !loc.is_valid() {
                    return Err(Error::invalid(format!("node `{id}` has coordinates out of range ({lat}, {lon})")));
                }
                Some(loc)
            }
            _ => None,
        };
        raw_nodes.push(RawNode { name: label.filter(|l| !l.is_empty()).unwrap_or_else(|| id.to_string()), loc });
    }

    // (min, max) endpoint pair -> declared lengths of every parallel edge
    // (None = derive from coordinates)
    let mut edge_order = Vec::new();
    let mut edges: HashMap<(usize, usize), Vec<Option<f64>>> = HashMap::new();
    for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
        let endpoint = |attr: &str| -> Result<usize> {
            let id = edge.attribute(attr).ok_or_else(|| Error::Xml(format!("<edge> without {attr}")))?;
            index_of
                .get(id)
                .copied()
                .ok_or_else(|| Error::Xml(format!("edge references undeclared node `{id}`")))
        };
        let (u, v) = (endpoint("source")?, endpoint("target")?);
        if u == v {
            continue;
        }
        let mut length = None;
        for data in edge.children().filter(|n| n.has_tag_name("data")) {
            let Some(name) = data.attribute("key").and_then(|k| edge_keys.get(k)) else {
                continue;
            };
            if matches!(name.to_ascii_lowercase().as_str(), "length" | "linklength" | "distance") {
                length = data.text().and_then(|t| t.trim().parse::<f64>().ok()).filter(|l| *l >= 0.0);
            }
        }
        let key = (u.min(v), u.max(v));
        edges
            .entry(key)
            .or_insert_with(|| {
                edge_order.push(key);
                Vec::new()
            })
            .push(length);
    }
    let mut edge_list: EdgeList =
        edge_order.iter().map(|k| (*k, edges.remove(k).unwrap_or_default())).collect();

    if let Some(missing) = raw_nodes.iter().find(|n| n.loc.is_none()) {
        match opts.missing_coords {
            MissingCoords::Reject => return Err(Error::MissingCoordinates(missing.name.clone())),
            MissingCoords::Repair => repair(&mut raw_nodes, &mut edge_list)?,
        }
    }

    let nodes = raw_nodes
        .iter()
        .enumerate()
        .map(|(id, raw)| {
            let loc = raw.loc.expect("locations resolved");
            Node {
                id,
                name: raw.name.clone(),
                lat: loc.lat,
                lon: loc.lon,
                gateway_candidate: true,
                controller_candidate: true,
                failure_prob: 0.0,
            }
        })
        .collect::<Vec<_>>();
    let links = edge_list
        .into_iter()
        .map(|((u, v), lengths)| {
            let great_circle = haversine_km(nodes[u].location(), nodes[v].location());
            // parallel edges collapse to the shortest span
            let length_km = lengths.iter().map(|l| l.unwrap_or(great_circle)).fold(f64::INFINITY, f64::min);
            Ok(Link { u, v, length_km, latency_ms: link_latency_ms_at(length_km, opts.signal_speed_km_s)?, failure_prob: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Topology::new(nodes, links, SatelliteLink { failure_prob: 0.0, delay_ms: opts.sat_hop_delay_ms })
}

type EdgeList = Vec<((usize, usize), Vec<Option<f64>>)>;

fn repair(nodes: &mut Vec<RawNode>, edges: &mut EdgeList) -> Result<()> {
    let n = nodes.len();
    let degree = |edges: &EdgeList, v: usize| edges.iter().filter(|((a, b), _)| *a == v || *b == v).count();

    let drop: Vec<bool> = (0..n).map(|v| nodes[v].loc.is_none() && degree(edges, v) <= 1).collect();
    if drop.iter().any(|&d| d) {
        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for (v, node) in std::mem::take(nodes).into_iter().enumerate() {
            if !drop[v] {
                remap[v] = kept.len();
                kept.push(node);
            }
        }
        *nodes = kept;
        edges.retain(|((a, b), _)| !drop[*a] && !drop[*b]);
        for ((a, b), _) in edges.iter_mut() {
            *a = remap[*a];
            *b = remap[*b];
        }
    }

    loop {
        let pending: Vec<usize> = (0..nodes.len()).filter(|&v| nodes[v].loc.is_none()).collect();
        if pending.is_empty() {
            return Ok(());
        }
        let mut placed = Vec::new();
        for &v in &pending {
            let located: Vec<LatLon> = edges
                .iter()
                .filter_map(|((a, b), _)| match (*a == v, *b == v) {
                    (true, _) => Some(*b),
                    (_, true) => Some(*a),
                    _ => None,
                })
                .filter_map(|w| nodes[w].loc)
                .collect();
            if !located.is_empty() {
                placed.push((v, spherical_centroid(&located)));
            }
        }
        if placed.is_empty() {
            return Err(Error::MissingCoordinates(nodes[pending[0]].name.clone()));
        }
        for (v, loc) in placed {
            nodes[v].loc = Some(loc);
        }
    }
}

fn spherical_centroid(points: &[LatLon]) -> LatLon {
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for p in points {
        let (phi, lambda) = (p.lat.to_radians(), p.lon.to_radians());
        x += phi.cos() * lambda.cos();
        y += phi.cos() * lambda.sin();
        z += phi.sin();
    }
    let hyp = (x * x + y * y).sqrt();
    if hyp < 1e-12 && z.abs() < 1e-12 {
        // antipodal neighbours; fall back to the first one
        return points[0];
    }
    LatLon::new(z.atan2(hyp).to_degrees(), y.atan2(x).to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(nodes: &str, edges: &str) -> String {
        format!(
            r#"<?xml version="1.0" encoding="utf-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key attr.name="Longitude" attr.type="double" for="node" id="d32" />
  <key attr.name="Latitude" attr.type="double" for="node" id="d29" />
  <key attr.name="label" attr.type="string" for="node" id="d33" />
  <key attr.name="length" attr.type="double" for="edge" id="e1" />
  <key attr.name="LinkSpeed" attr.type="string" for="edge" id="e2" />
  <graph edgedefault="undirected">{nodes}{edges}</graph>
</graphml>"#
        )
    }

    fn node(id: &str, lat: Option<f64>, lon: Option<f64>) -> String {
        let mut s = format!(r#"<node id="{id}"><data key="d33">{id}</data>"#);
        if let Some(lat) = lat {
            s += &format!(r#"<data key="d29">{lat}</data>"#);
        }
        if let Some(lon) = lon {
            s += &format!(r#"<data key="d32">{lon}</data>"#);
        }
        s + "</node>"
    }

    fn edge(a: &str, b: &str, len: Option<f64>) -> String {
        match len {
            Some(l) => format!(r#"<edge source="{a}" target="{b}"><data key="e1">{l}</data><data key="e2">10</data></edge>"#),
            None => format!(r#"<edge source="{a}" target="{b}"><data key="e2">10</data></edge>"#),
        }
    }

    #[test]
    fn coincident_endpoints_give_zero_latency() {
        let d = doc(&(node("a", Some(0.0), Some(0.0)) + &node("b", Some(0.0), Some(0.0))), &edge("a", "b", None));
        let t = load_graphml(d.as_bytes()).unwrap();
        assert_eq!((t.node_count(), t.link_count()), (2, 1));
        assert_eq!(t.links()[0].length_km, 0.0);
        assert_eq!(t.links()[0].latency_ms, 0.0);
    }

    #[test]
    fn declared_length_wins_and_parallels_collapse() {
        let nodes = node("a", Some(0.0), Some(0.0)) + &node("b", Some(0.0), Some(10.0));
        let edges = edge("a", "b", Some(900.0)) + &edge("b", "a", Some(400.0)) + &edge("a", "a", None);
        let t = load_graphml(doc(&nodes, &edges).as_bytes()).unwrap();
        assert_eq!(t.link_count(), 1);
        assert_eq!(t.links()[0].length_km, 400.0);
        assert!((t.links()[0].latency_ms - 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_length_falls_back_to_haversine() {
        let nodes = node("a", Some(0.0), Some(0.0)) + &node("b", Some(90.0), Some(0.0));
        let t = load_graphml(doc(&nodes, &edge("a", "b", None)).as_bytes()).unwrap();
        assert!((t.links()[0].length_km - 10007.54).abs() < 0.01);
    }

    #[test]
    fn missing_coordinates_reported_by_name() {
        let nodes = node("a", Some(0.0), Some(0.0)) + &node("lost", Some(1.0), None);
        let err = load_graphml(doc(&nodes, &edge("a", "lost", None)).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingCoordinates(ref n) if n == "lost"), "{err}");
    }

    #[test]
    fn disconnected_and_malformed_rejected() {
        let nodes = node("a", Some(0.0), Some(0.0)) + &node("b", Some(0.0), Some(1.0)) + &node("c", Some(0.0), Some(2.0));
        let err = load_graphml(doc(&nodes, &edge("a", "b", None)).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Disconnected(ref c) if c.len() == 2), "{err}");
        assert!(err.to_string().contains("{c}"));

        assert!(matches!(load_graphml(b"<graphml><graph>"), Err(Error::Xml(_))));
        let bad_ref = doc(&node("a", Some(0.0), Some(0.0)), &edge("a", "zz", None));
        assert!(matches!(load_graphml(bad_ref.as_bytes()), Err(Error::Xml(_))));
    }

    #[test]
    fn repair_prunes_leaves_and_imputes_interior() {
        // a - x - b with x unlocated (interior), plus unlocated leaf y on a
        let nodes = node("a", Some(0.0), Some(0.0))
            + &node("x", None, None)
            + &node("b", Some(0.0), Some(20.0))
            + &node("y", None, None);
        let edges = edge("a", "x", None) + &edge("x", "b", None) + &edge("a", "y", None);
        let opts = GraphmlOptions { missing_coords: MissingCoords::Repair, ..Default::default() };
        let t = load_graphml_with(doc(&nodes, &edges).as_bytes(), &opts).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.link_count(), 2);
        let x = &t.nodes()[1];
        assert_eq!(x.name, "x");
        assert!(x.lat.abs() < 1e-9 && (x.lon - 10.0).abs() < 1e-9);
    }
}
