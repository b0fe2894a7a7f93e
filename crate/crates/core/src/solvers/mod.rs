//! Set-function maximisation: randomized double greedy for unconstrained
//! non-negative submodular functions, descending-threshold greedy under a
//! cardinality budget, and exhaustive enumeration as the exact baseline.
//!
//! Solvers work on ground-set *positions* `0..n`; [`SetFunction::ground_ids`]
//! maps positions back to node ids when building a [`SolveResult`].

mod double_greedy;
mod exact;
mod joint;
mod oracle;
mod threshold;

use serde::{Deserialize, Serialize};

pub use double_greedy::{double_greedy, double_greedy_restarts};
pub use exact::{exact_enumerate, exact_feasible, MAX_BUDGETED_SUBSETS, MAX_UNBUDGETED_GROUND};
pub use joint::{
    solve_controller_overhead, solve_controller_reliability, solve_gateway_latency, solve_gateway_reliability, solve_joint,
    JointMetrics, JointMode, JointSolution, Method, SolverOptions,
};
pub use oracle::{FacilityOracle, FacilityState};
pub use threshold::{threshold_greedy, threshold_greedy_eval_ceiling};

/// A set function over positions `0..ground_size()` with incremental
/// marginal evaluation.
///
/// Implementations define `f(∅) = 0`.
pub trait SetFunction: Sync {
    type State: Clone + Send;

    fn ground_size(&self) -> usize;

    /// Identifier reported for each position (node id for placement
    /// oracles).
    fn ground_ids(&self) -> Vec<usize> {
        (0..self.ground_size()).collect()
    }

    fn empty_state(&self) -> Self::State;

    fn contains(&self, state: &Self::State, i: usize) -> bool;

    fn len(&self, state: &Self::State) -> usize;

    fn value(&self, state: &Self::State) -> f64;

    /// `f(S ∪ {i}) - f(S)` for `i ∉ S`.
    fn gain_add(&self, state: &Self::State, i: usize) -> f64;

    /// `f(S \ {i}) - f(S)` for `i ∈ S`.
    fn gain_remove(&self, state: &Self::State, i: usize) -> f64;

    fn insert(&self, state: &mut Self::State, i: usize);

    fn remove(&self, state: &mut Self::State, i: usize);

    fn state_of(&self, members: &[usize]) -> Self::State {
        let mut s = self.empty_state();
        for &i in members {
            if !self.contains(&s, i) {
                self.insert(&mut s, i);
            }
        }
        s
    }

    fn full_state(&self) -> Self::State {
        self.state_of(&(0..self.ground_size()).collect::<Vec<_>>())
    }

    fn evaluate(&self, members: &[usize]) -> f64 {
        self.value(&self.state_of(members))
    }
}

/// Wraps a closure evaluated from scratch on every query. Marginals cost
/// two evaluations each. Handy for tests and small ad-hoc objectives.
pub struct NaiveSetFunction<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[usize]) -> f64 + Sync> NaiveSetFunction<F> {
    /// `f` receives the members in increasing order and must return 0 on
    /// the empty slice.
    pub fn new(n: usize, f: F) -> Self {
        NaiveSetFunction { n, f }
    }

    fn eval_mask(&self, mask: &[bool]) -> f64 {
        let members: Vec<usize> = (0..self.n).filter(|&i| mask[i]).collect();
        (self.f)(&members)
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> SetFunction for NaiveSetFunction<F> {
    type State = Vec<bool>;

    fn ground_size(&self) -> usize {
        self.n
    }

    fn empty_state(&self) -> Vec<bool> {
        vec![false; self.n]
    }

    fn contains(&self, state: &Vec<bool>, i: usize) -> bool {
        state[i]
    }

    fn len(&self, state: &Vec<bool>) -> usize {
        state.iter().filter(|&&b| b).count()
    }

    fn value(&self, state: &Vec<bool>) -> f64 {
        self.eval_mask(state)
    }

    fn gain_add(&self, state: &Vec<bool>, i: usize) -> f64 {
        let mut with = state.clone();
        with[i] = true;
        self.eval_mask(&with) - self.eval_mask(state)
    }

    fn gain_remove(&self, state: &Vec<bool>, i: usize) -> f64 {
        let mut without = state.clone();
        without[i] = false;
        self.eval_mask(&without) - self.eval_mask(state)
    }

    fn insert(&self, state: &mut Vec<bool>, i: usize) {
        state[i] = true;
    }

    fn remove(&self, state: &mut Vec<bool>, i: usize) {
        state[i] = false;
    }
}

/// Outcome of one solver invocation.
///
/// `evaluations` counts oracle queries (a marginal gain is one query); the
/// final re-evaluation that produces `value` is not counted.
/// `wall_time_ms` is the only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Chosen node ids, ascending.
    pub open: Vec<usize>,
    pub value: f64,
    pub evaluations: u64,
    pub wall_time_ms: f64,
    /// Master seed; 0 for deterministic algorithms.
    pub seed: u64,
}

impl SolveResult {
    pub(crate) fn from_positions<S: SetFunction + ?Sized>(
        oracle: &S,
        mut positions: Vec<usize>,
        evaluations: u64,
        started: std::time::Instant,
        seed: u64,
    ) -> Self {
        positions.sort_unstable();
        let value = oracle.evaluate(&positions);
        let ids = oracle.ground_ids();
        let mut open: Vec<usize> = positions.iter().map(|&p| ids[p]).collect();
        open.sort_unstable();
        SolveResult { open, value, evaluations, wall_time_ms: started.elapsed().as_secs_f64() * 1e3, seed }
    }

    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &SolveResult) -> bool {
        self.open == other.open
            && self.value.to_bits() == other.value.to_bits()
            && self.evaluations == other.evaluations
            && self.seed == other.seed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_marginals() {
        let f = NaiveSetFunction::new(3, |s: &[usize]| s.iter().map(|&i| (i + 1) as f64).sum::<f64>());
        let mut s = f.empty_state();
        assert_eq!(f.gain_add(&s, 2), 3.0);
        f.insert(&mut s, 2);
        f.insert(&mut s, 0);
        assert_eq!(f.value(&s), 4.0);
        assert_eq!(f.gain_remove(&s, 0), -1.0);
        assert_eq!(f.len(&s), 2);
        assert_eq!(f.evaluate(&[0, 1, 2]), 6.0);
    }
}
