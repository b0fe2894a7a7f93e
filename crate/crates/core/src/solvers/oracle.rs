use crate::objectives::{controller_cost_upper_bound, gateway_cost_upper_bound, ObjectiveConfig, GatewayPolicy};
use crate::paths::{Matrix, PathTables};

use super::SetFunction;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
enum Shape {
    /// `sum_v max_{i in S} score[i][v]`
    Coverage,
    /// `offset - (sum_{i in S} unit[i] + sum_{i != j in S} pair[i][j] + weight * sum_v min_{i in S} score[i][v])`
    Complement { weight: f64, unit: Vec<f64>, pair: Option<Matrix>, offset: f64 },
}

/// Facility-location set function over a candidate list, covering every
/// placement objective: the two reliability utilities and the complements
/// of the gateway and controller costs.
///
/// Marginals are incremental: the state caches every node's best open
/// facility, so adding costs O(|V|) and removing rescans only the nodes
/// that lose their facility.
#[derive(Debug, Clone)]
pub struct FacilityOracle {
    ids: Vec<usize>,
    score: Matrix,
    shape: Shape,
}

#[derive(Debug, Clone)]
pub struct FacilityState {
    members: Vec<bool>,
    count: usize,
    best: Vec<f64>,
    best_of: Vec<usize>,
    unit_total: f64,
    /// for every position x: sum over members j != x of pair[x][j] + pair[j][x]
    pair_sum: Vec<f64>,
    pair_total: f64,
}

impl FacilityOracle {
    /// `U_g`: sum over nodes of the best satellite-path reliability.
    pub fn gateway_utility(tables: &PathTables) -> Self {
        FacilityOracle { ids: tables.gateways().to_vec(), score: tables.r_sat_matrix().clone(), shape: Shape::Coverage }
    }

    /// `U_c`: sum over nodes of the best control-path reliability.
    pub fn controller_utility(tables: &PathTables) -> Self {
        FacilityOracle { ids: tables.controllers().to_vec(), score: tables.r_ctl_matrix().clone(), shape: Shape::Coverage }
    }

    /// Upper bound minus the gateway cost.
    pub fn gateway_complement(tables: &PathTables, cfg: &ObjectiveConfig) -> Self {
        let ids = tables.gateways().to_vec();
        let score = latency_rows(tables, &ids);
        let shape = Shape::Complement {
            weight: cfg.alpha,
            unit: vec![1.0; ids.len()],
            pair: None,
            offset: gateway_cost_upper_bound(tables, cfg),
        };
        FacilityOracle { ids, score, shape }
    }

    /// Upper bound minus the controller cost for a fixed gateway policy.
    ///
    /// The ordered-pair load term equals `l_con * |V| * (|S| - 1)`, so it
    /// splits into a per-controller unit cost and a constant folded into
    /// the offset.
    pub fn controller_complement(gw: &GatewayPolicy, tables: &PathTables, cfg: &ObjectiveConfig) -> Self {
        let ids = tables.controllers().to_vec();
        let score = latency_rows(tables, &ids);
        let n_nodes = tables.node_count() as f64;
        let unit = ids
            .iter()
            .map(|&m| cfg.beta * (cfg.l_con * n_nodes + tables.latency(gw.assign[m], m)))
            .collect();
        let pair = Matrix::from_rows(
            ids.iter()
                .map(|&m| ids.iter().map(|&n| if m == n { 0.0 } else { cfg.beta * tables.latency(m, n) }).collect())
                .collect(),
        );
        let shape = Shape::Complement {
            weight: 1.0,
            unit,
            pair: Some(pair),
            offset: controller_cost_upper_bound(gw, tables, cfg) + cfg.beta * cfg.l_con * n_nodes,
        };
        FacilityOracle { ids, score, shape }
    }

    fn n_nodes(&self) -> usize {
        self.score.cols()
    }

    fn is_coverage(&self) -> bool {
        matches!(self.shape, Shape::Coverage)
    }

    /// `a` strictly improves on `b` for this oracle's sense.
    #[inline]
    fn improves(&self, a: f64, b: f64) -> bool {
        if self.is_coverage() {
            a > b
        } else {
            a < b
        }
    }

    fn unit(&self, i: usize) -> f64 {
        match &self.shape {
            Shape::Complement { unit, .. } => unit[i],
            Shape::Coverage => 0.0,
        }
    }

    fn pair(&self, a: usize, b: usize) -> f64 {
        match &self.shape {
            Shape::Complement { pair: Some(p), .. } => p.get(a, b) + p.get(b, a),
            _ => 0.0,
        }
    }

    fn has_pairs(&self) -> bool {
        matches!(self.shape, Shape::Complement { pair: Some(_), .. })
    }

    fn value_of_singleton(&self, i: usize) -> f64 {
        let row = self.score.row(i);
        match &self.shape {
            Shape::Coverage => row.iter().sum(),
            Shape::Complement { weight, unit, offset, .. } => offset - (unit[i] + weight * row.iter().sum::<f64>()),
        }
    }

    /// Best score for node `v` among members other than `skip`.
    fn rescan(&self, s: &FacilityState, v: usize, skip: usize) -> (f64, usize) {
        let mut best = (self.empty_best(), NONE);
        for (i, &m) in s.members.iter().enumerate() {
            if m && i != skip {
                let sc = self.score.get(i, v);
                if best.1 == NONE || self.improves(sc, best.0) {
                    best = (sc, i);
                }
            }
        }
        best
    }

    fn empty_best(&self) -> f64 {
        if self.is_coverage() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }
}

fn latency_rows(tables: &PathTables, ids: &[usize]) -> Matrix {
    Matrix::from_rows(ids.iter().map(|&j| tables.latency_matrix().row(j).to_vec()).collect())
}

impl SetFunction for FacilityOracle {
    type State = FacilityState;

    fn ground_size(&self) -> usize {
        self.ids.len()
    }

    fn ground_ids(&self) -> Vec<usize> {
        self.ids.clone()
    }

    fn empty_state(&self) -> FacilityState {
        FacilityState {
            members: vec![false; self.ids.len()],
            count: 0,
            best: vec![self.empty_best(); self.n_nodes()],
            best_of: vec![NONE; self.n_nodes()],
            unit_total: 0.0,
            pair_sum: vec![0.0; self.ids.len()],
            pair_total: 0.0,
        }
    }

    fn contains(&self, s: &FacilityState, i: usize) -> bool {
        s.members[i]
    }

    fn len(&self, s: &FacilityState) -> usize {
        s.count
    }

    fn value(&self, s: &FacilityState) -> f64 {
        if s.count == 0 {
            return 0.0;
        }
        let covered: f64 = s.best.iter().sum();
        match &self.shape {
            Shape::Coverage => covered,
            Shape::Complement { weight, offset, .. } => offset - (s.unit_total + s.pair_total + weight * covered),
        }
    }

    fn gain_add(&self, s: &FacilityState, i: usize) -> f64 {
        debug_assert!(!s.members[i]);
        if s.count == 0 {
            return self.value_of_singleton(i);
        }
        let row = self.score.row(i);
        match &self.shape {
            Shape::Coverage => row.iter().zip(&s.best).map(|(&sc, &b)| (sc - b).max(0.0)).sum(),
            Shape::Complement { weight, unit, .. } => {
                let saved: f64 = row.iter().zip(&s.best).map(|(&sc, &b)| (b - sc).max(0.0)).sum();
                weight * saved - unit[i] - s.pair_sum[i]
            }
        }
    }

    fn gain_remove(&self, s: &FacilityState, i: usize) -> f64 {
        debug_assert!(s.members[i]);
        if s.count == 1 {
            return -self.value(s);
        }
        // change in sum_v best[v] once i is gone
        let mut delta = 0.0;
        for v in 0..self.n_nodes() {
            if s.best_of[v] == i {
                delta += self.rescan(s, v, i).0 - s.best[v];
            }
        }
        match &self.shape {
            Shape::Coverage => delta,
            Shape::Complement { weight, unit, .. } => unit[i] + s.pair_sum[i] - weight * delta,
        }
    }

    fn insert(&self, s: &mut FacilityState, i: usize) {
        debug_assert!(!s.members[i]);
        s.members[i] = true;
        s.count += 1;
        s.unit_total += self.unit(i);
        if self.has_pairs() {
            s.pair_total += s.pair_sum[i];
            for x in 0..self.ids.len() {
                if x != i {
                    s.pair_sum[x] += self.pair(x, i);
                }
            }
        }
        let row = self.score.row(i);
        for v in 0..self.n_nodes() {
            // ties keep the lower position so best_of matches the induced assignment
            if s.best_of[v] == NONE || self.improves(row[v], s.best[v]) || (row[v] == s.best[v] && i < s.best_of[v]) {
                s.best[v] = row[v];
                s.best_of[v] = i;
            }
        }
    }

    fn remove(&self, s: &mut FacilityState, i: usize) {
        debug_assert!(s.members[i]);
        if self.has_pairs() {
            s.pair_total -= s.pair_sum[i];
            for x in 0..self.ids.len() {
                if x != i {
                    s.pair_sum[x] -= self.pair(x, i);
                }
            }
        }
        s.unit_total -= self.unit(i);
        s.count -= 1;
        for v in 0..self.n_nodes() {
            if s.best_of[v] == i {
                let (b, at) = self.rescan(s, v, i);
                s.best[v] = b;
                s.best_of[v] = at;
            }
        }
        s.members[i] = false;
        if s.count == 0 {
            // clear accumulated rounding
            s.unit_total = 0.0;
            s.pair_total = 0.0;
            s.pair_sum.iter_mut().for_each(|p| *p = 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{controller_cost_complement, controller_utility, gateway_cost_complement, gateway_utility};
    use crate::paths::build_reliability_tables;
    use crate::topology::{random_topology, sample_failures, FailureCase};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(n: usize, seed: u64) -> PathTables {
        let t = sample_failures(&random_topology(n, n / 2, seed), &FailureCase::ALL[3], seed);
        build_reliability_tables(&t, 1).unwrap()
    }

    #[test]
    fn incremental_matches_naive_objectives() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let tables = instance(9, seed);
            let cfg = ObjectiveConfig { alpha: rng.gen_range(0.0..3.0), beta: rng.gen_range(0.0..2.0), l_con: 0.3, ..Default::default() };
            let gw = GatewayPolicy::by_latency(&[0, 4], &tables).unwrap();
            let oracles = [
                FacilityOracle::gateway_utility(&tables),
                FacilityOracle::controller_utility(&tables),
                FacilityOracle::gateway_complement(&tables, &cfg),
                FacilityOracle::controller_complement(&gw, &tables, &cfg),
            ];
            let naive = |which: usize, open: &[usize]| match which {
                0 => gateway_utility(open, &tables).unwrap(),
                1 => controller_utility(open, &tables).unwrap(),
                2 => gateway_cost_complement(open, &tables, &cfg).unwrap(),
                _ => controller_cost_complement(open, &gw, &tables, &cfg).unwrap(),
            };
            for (which, oracle) in oracles.iter().enumerate() {
                // random walk of inserts/removes, checking value and both marginals
                let mut s = oracle.empty_state();
                for _ in 0..60 {
                    let i = rng.gen_range(0..9);
                    let members: Vec<usize> = (0..9).filter(|&x| s.members[x]).collect();
                    if s.members[i] {
                        let g = oracle.gain_remove(&s, i);
                        let rest: Vec<usize> = members.iter().copied().filter(|&x| x != i).collect();
                        let after = if rest.is_empty() { 0.0 } else { naive(which, &rest) };
                        assert!((g - (after - naive(which, &members))).abs() < 1e-9);
                        oracle.remove(&mut s, i);
                    } else {
                        let g = oracle.gain_add(&s, i);
                        let before = if members.is_empty() { 0.0 } else { naive(which, &members) };
                        let mut with = members.clone();
                        with.push(i);
                        assert!((g - (naive(which, &with) - before)).abs() < 1e-9);
                        oracle.insert(&mut s, i);
                    }
                    let members: Vec<usize> = (0..9).filter(|&x| s.members[x]).collect();
                    if !members.is_empty() {
                        assert!((oracle.value(&s) - naive(which, &members)).abs() < 1e-9);
                    } else {
                        assert_eq!(oracle.value(&s), 0.0);
                    }
                }
            }
        }
    }
}
