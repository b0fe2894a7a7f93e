//! Shortest paths, Yen's k-shortest loopless paths, and the latency and
//! reliability tables consumed by every objective.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::path::Path as FsPath;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::Topology;

const NONE: usize = usize::MAX;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// A simple path together with its total latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub latency_ms: f64,
}

impl Path {
    /// Build a path from a node sequence, summing link latencies in order.
    /// Fails if two consecutive nodes are not adjacent.
    pub fn from_nodes(topo: &Topology, nodes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("empty path"));
        }
        let mut latency_ms = 0.0;
        for hop in nodes.windows(2) {
            let link = topo
                .link_between(hop[0], hop[1])
                .ok_or_else(|| Error::invalid(format!("nodes {} and {} are not adjacent", hop[0], hop[1])))?;
            latency_ms += link.latency_ms;
        }
        Ok(Path { nodes, latency_ms })
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().expect("non-empty path")
    }

    pub fn reversed(&self) -> Path {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Path { nodes, latency_ms: self.latency_ms }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // reversed so that BinaryHeap pops the smallest (dist, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

/// Single-source Dijkstra over link latencies, skipping banned nodes and
/// links. Among equal-latency predecessors the lowest node id is kept.
fn dijkstra(topo: &Topology, src: usize, banned_nodes: &[bool], banned_links: &[bool]) -> (Vec<f64>, Vec<usize>) {
    let n = topo.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: src });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        for &(w, link) in topo.neighbors(u) {
            if settled[w] || banned_nodes.get(w).copied().unwrap_or(false) || banned_links.get(link).copied().unwrap_or(false) {
                continue;
            }
            let nd = d + topo.links()[link].latency_ms;
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = u;
                heap.push(HeapEntry { dist: nd, node: w });
            } else if nd == dist[w] && u < pred[w] {
                pred[w] = u;
            }
        }
    }
    (dist, pred)
}

fn walk_back(pred: &[usize], src: usize, dst: usize) -> Vec<usize> {
    let mut nodes = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = pred[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    nodes
}

/// All-pairs shortest-path latencies plus one shortest-path tree per source.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    dist: Matrix,
    pred: Vec<Vec<usize>>,
}

impl ShortestPaths {
    pub fn latency(&self, u: usize, v: usize) -> f64 {
        self.dist.get(u, v)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.dist
    }

    /// The tree path from `u` to `v`.
    pub fn path(&self, topo: &Topology, u: usize, v: usize) -> Path {
        let nodes = walk_back(&self.pred[u], u, v);
        Path::from_nodes(topo, nodes).expect("tree paths follow links")
    }
}

/// Dijkstra from every source. The topology is connected, so every entry is
/// finite.
pub fn all_pairs_shortest(topo: &Topology) -> ShortestPaths {
    let n = topo.node_count();
    let trees: Vec<(Vec<f64>, Vec<usize>)> = (0..n).into_par_iter().map(|s| dijkstra(topo, s, &[], &[])).collect();
    let mut dist = Matrix::filled(n, n, 0.0);
    let mut pred = Vec::with_capacity(n);
    for (s, (d, p)) in trees.into_iter().enumerate() {
        for (v, dv) in d.into_iter().enumerate() {
            dist.set(s, v, dv);
        }
        pred.push(p);
    }
    // both triangles come from independent runs; symmetrise on the lower id
    for u in 0..n {
        for v in u + 1..n {
            let d = dist.get(u, v);
            dist.set(v, u, d);
        }
    }
    ShortestPaths { dist, pred }
}

#[derive(PartialEq)]
struct Candidate(Path);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.latency_ms.total_cmp(&other.0.latency_ms).then_with(|| self.0.nodes.cmp(&other.0.nodes))
    }
}

/// Yen's algorithm: up to `k` loopless `u`→`v` paths in nondecreasing
/// latency, ties broken by lexicographic node sequence.
pub fn yen_k_shortest(topo: &Topology, u: usize, v: usize, k: usize) -> Result<Vec<Path>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = topo.node_count();
    if u >= n || v >= n {
        return Err(Error::invalid(format!("node id out of range (topology has {n} nodes)")));
    }
    if u == v {
        return Ok(vec![Path { nodes: vec![u], latency_ms: 0.0 }]);
    }
    let (dist, pred) = dijkstra(topo, u, &[], &[]);
    if !dist[v].is_finite() {
        return Ok(Vec::new());
    }
    let mut accepted = vec![Path::from_nodes(topo, walk_back(&pred, u, v))?];
    let mut candidates: BTreeSet<Candidate> = BTreeSet::new();
    let mut banned_nodes = vec![false; n];
    let mut banned_links = vec![false; topo.link_count()];

    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").nodes.clone();
        for spur_idx in 0..prev.len() - 1 {
            let spur = prev[spur_idx];
            let root = &prev[..=spur_idx];
            banned_nodes.iter_mut().for_each(|b| *b = false);
            banned_links.iter_mut().for_each(|b| *b = false);
            for p in &accepted {
                if p.nodes.len() > spur_idx + 1 && &p.nodes[..=spur_idx] == root {
                    let (a, b) = (p.nodes[spur_idx], p.nodes[spur_idx + 1]);
                    let link = topo.neighbors(a).iter().find(|&&(w, _)| w == b).expect("path hop").1;
                    banned_links[link] = true;
                }
            }
            for &r in &root[..spur_idx] {
                banned_nodes[r] = true;
            }
            let (dist, pred) = dijkstra(topo, spur, &banned_nodes, &banned_links);
            if !dist[v].is_finite() {
                continue;
            }
            let mut nodes = root[..spur_idx].to_vec();
            nodes.extend(walk_back(&pred, spur, v));
            let path = Path::from_nodes(topo, nodes)?;
            if !accepted.iter().any(|p| p.nodes == path.nodes) {
                candidates.insert(Candidate(path));
            }
        }
        match candidates.pop_first() {
            Some(Candidate(best)) => accepted.push(best),
            None => break,
        }
    }
    Ok(accepted)
}

/// Product of `(1 - p)` over every link and every node on the path (both
/// endpoints included), times `(1 - p_sat)` when the satellite hop is part
/// of the route. Factors are multiplied in sorted order so the result does
/// not depend on traversal direction.
pub fn path_reliability(path: &Path, topo: &Topology, include_sat_hop: bool) -> f64 {
    let mut factors: Vec<f64> = path.nodes.iter().map(|&v| 1.0 - topo.node(v).failure_prob).collect();
    for hop in path.nodes.windows(2) {
        let link = topo.link_between(hop[0], hop[1]).expect("path follows topology links");
        factors.push(1.0 - link.failure_prob);
    }
    if include_sat_hop {
        factors.push(1.0 - topo.sat().failure_prob);
    }
    factors.sort_by(f64::total_cmp);
    factors.into_iter().product()
}

/// Latency matrix `d` over all nodes plus reliability rows for every gateway
/// candidate (`r_sat`, through the satellite hop) and every controller
/// candidate (`r_ctl`, terrestrial only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTables {
    gateways: Vec<usize>,
    controllers: Vec<usize>,
    d: Matrix,
    r_sat: Matrix,
    r_ctl: Matrix,
    k_paths: usize,
}

impl PathTables {
    pub fn node_count(&self) -> usize {
        self.d.rows()
    }

    pub fn k_paths(&self) -> usize {
        self.k_paths
    }

    /// Gateway candidate node ids, in `r_sat` row order.
    pub fn gateways(&self) -> &[usize] {
        &self.gateways
    }

    /// Controller candidate node ids, in `r_ctl` row order.
    pub fn controllers(&self) -> &[usize] {
        &self.controllers
    }

    #[inline]
    pub fn latency(&self, u: usize, v: usize) -> f64 {
        self.d.get(u, v)
    }

    pub fn latency_matrix(&self) -> &Matrix {
        &self.d
    }

    /// Reliability rows indexed by gateway candidate position.
    pub fn r_sat_matrix(&self) -> &Matrix {
        &self.r_sat
    }

    /// Reliability rows indexed by controller candidate position.
    pub fn r_ctl_matrix(&self) -> &Matrix {
        &self.r_ctl
    }

    /// Reliability of node `v` reaching the satellite through gateway node `j`.
    ///
    /// Panics if `j` is not a gateway candidate.
    pub fn r_sat(&self, j: usize, v: usize) -> f64 {
        self.r_sat.get(row_of(&self.gateways, j, "gateway"), v)
    }

    /// Reliability of the control path between controller node `k` and `v`.
    ///
    /// Panics if `k` is not a controller candidate.
    pub fn r_ctl(&self, k: usize, v: usize) -> f64 {
        self.r_ctl.get(row_of(&self.controllers, k, "controller"), v)
    }

    pub fn is_gateway_candidate(&self, j: usize) -> bool {
        self.gateways.binary_search(&j).is_ok()
    }

    pub fn is_controller_candidate(&self, k: usize) -> bool {
        self.controllers.binary_search(&k).is_ok()
    }

    /// Write `d.csv`, `r_sat.csv` and `r_ctl.csv` into `dir`, with row and
    /// column headers by node name.
    pub fn write_csv(&self, topo: &Topology, dir: &FsPath) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let all: Vec<usize> = (0..self.node_count()).collect();
        write_matrix(topo, &dir.join("d.csv"), &all, &self.d)?;
        write_matrix(topo, &dir.join("r_sat.csv"), &self.gateways, &self.r_sat)?;
        write_matrix(topo, &dir.join("r_ctl.csv"), &self.controllers, &self.r_ctl)?;
        Ok(())
    }
}

fn row_of(ids: &[usize], id: usize, what: &str) -> usize {
    ids.binary_search(&id).unwrap_or_else(|_| panic!("node {id} is not a {what} candidate"))
}

fn write_matrix(topo: &Topology, path: &FsPath, row_ids: &[usize], m: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["node".to_string()];
    header.extend(topo.nodes().iter().map(|n| n.name.clone()));
    w.write_record(&header)?;
    for (r, &id) in row_ids.iter().enumerate() {
        let mut rec = vec![topo.node(id).name.clone()];
        rec.extend(m.row(r).iter().map(|x| format!("{x}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Best reliability over the `k_paths` shortest facility→node paths.
fn reliability_rows(topo: &Topology, sp: &ShortestPaths, facilities: &[usize], k_paths: usize, include_sat: bool) -> Result<Matrix> {
    let n = topo.node_count();
    let rows = facilities
        .par_iter()
        .map(|&j| {
            (0..n)
                .map(|v| {
                    if k_paths == 1 {
                        Ok(path_reliability(&sp.path(topo, j, v), topo, include_sat))
                    } else {
                        Ok(yen_k_shortest(topo, j, v, k_paths)?
                            .iter()
                            .map(|p| path_reliability(p, topo, include_sat))
                            .fold(0.0, f64::max))
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows))
}

pub fn build_reliability_tables(topo: &Topology, k_paths: usize) -> Result<PathTables> {
    if k_paths == 0 {
        return Err(Error::invalid("k_paths must be at least 1"));
    }
    let sp = all_pairs_shortest(topo);
    let gateways = topo.gateway_candidates();
    let controllers = topo.controller_candidates();
    let r_sat = reliability_rows(topo, &sp, &gateways, k_paths, true)?;
    let r_ctl = reliability_rows(topo, &sp, &controllers, k_paths, false)?;
    Ok(PathTables { gateways, controllers, d: sp.dist, r_sat, r_ctl, k_paths })
}
