use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;

use super::{SetFunction, SolveResult};
use crate::error::{Error, Result};

/// Largest ground set enumerated without a budget.
pub const MAX_UNBUDGETED_GROUND: usize = 25;
/// Largest `C(n, budget)` enumerated with a budget.
pub const MAX_BUDGETED_SUBSETS: f64 = 5e6;

const GRAY_CHUNKS: u64 = 64;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Whether [`exact_enumerate`] accepts a ground set of size `n` with the
/// given budget. A budget of at least `n` counts as no budget.
pub fn exact_feasible(n: usize, budget: Option<usize>) -> Result<()> {
    match budget {
        Some(b) if b < n => {
            let subsets = binomial(n, b);
            if subsets > MAX_BUDGETED_SUBSETS {
                return Err(Error::InstanceTooLarge { subsets, limit: MAX_BUDGETED_SUBSETS });
            }
        }
        _ => {
            if n > MAX_UNBUDGETED_GROUND {
                return Err(Error::InstanceTooLarge {
                    subsets: 2f64.powi(n as i32),
                    limit: 2f64.powi(MAX_UNBUDGETED_GROUND as i32),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    members: Vec<usize>,
}

impl Best {
    fn none() -> Self {
        Best { value: f64::NEG_INFINITY, members: Vec::new() }
    }

    /// Strict preference with a relative tolerance on value, then smaller
    /// set, then lexicographically smaller member list.
    fn beats(&self, other: &Best) -> bool {
        if other.members.is_empty() {
            return !self.members.is_empty();
        }
        let tol = 1e-9 * other.value.abs().max(1.0);
        if self.value > other.value + tol {
            return true;
        }
        if self.value < other.value - tol {
            return false;
        }
        match self.members.len().cmp(&other.members.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.members < other.members,
        }
    }

    fn offer(&mut self, value: f64, members: impl FnOnce() -> Vec<usize>) {
        let tol = 1e-9 * self.value.abs().max(1.0);
        if !self.members.is_empty() && value < self.value - tol {
            return;
        }
        let cand = Best { value, members: members() };
        if cand.beats(self) {
            *self = cand;
        }
    }

    fn merge(mut self, other: Best) -> Best {
        if other.beats(&self) {
            self = other;
        }
        self
    }
}

/// Global maximum of `oracle` over every non-empty subset, or every
/// non-empty subset of size at most `budget`.
///
/// Ties within a relative 1e-9 go to the smaller set, then to the
/// lexicographically smaller one. `evaluations` is the number of subsets
/// visited.
pub fn exact_enumerate<S: SetFunction + ?Sized>(oracle: &S, budget: Option<usize>) -> Result<SolveResult> {
    let started = Instant::now();
    let n = oracle.ground_size();
    if n == 0 {
        return Err(Error::invalid("ground set is empty"));
    }
    if budget == Some(0) {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let budget = budget.filter(|&b| b < n);
    exact_feasible(n, budget)?;
    let (best, evaluations) = match budget {
        None => gray_enumerate(oracle),
        Some(b) => budgeted_enumerate(oracle, b),
    };
    Ok(SolveResult::from_positions(oracle, best.members, evaluations, started, 0))
}

fn members_of<S: SetFunction + ?Sized>(oracle: &S, state: &S::State) -> Vec<usize> {
    (0..oracle.ground_size()).filter(|&i| oracle.contains(state, i)).collect()
}

fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

/// Walks Gray-code indices `1..2^n` in parallel chunks; consecutive codes
/// differ in one element so each subset costs one insert or remove.
fn gray_enumerate<S: SetFunction + ?Sized>(oracle: &S) -> (Best, u64) {
    let n = oracle.ground_size();
    let total = 1u64 << n;
    let chunks = GRAY_CHUNKS.min(total);
    let step = total.div_ceil(chunks);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = (c * step).max(1);
            let hi = ((c + 1) * step).min(total);
            let mut best = Best::none();
            if lo >= hi {
                return best;
            }
            let code = gray(lo);
            let start: Vec<usize> = (0..n).filter(|&i| code >> i & 1 == 1).collect();
            let mut state = oracle.state_of(&start);
            best.offer(oracle.value(&state), || start.clone());
            for k in lo + 1..hi {
                let bit = k.trailing_zeros() as usize;
                if oracle.contains(&state, bit) {
                    oracle.remove(&mut state, bit);
                } else {
                    oracle.insert(&mut state, bit);
                }
                best.offer(oracle.value(&state), || members_of(oracle, &state));
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::none(), Best::merge);
    (best, total - 1)
}

/// Depth-first over subsets of size `1..=budget`, one parallel task per
/// smallest element.
fn budgeted_enumerate<S: SetFunction + ?Sized>(oracle: &S, budget: usize) -> (Best, u64) {
    let n = oracle.ground_size();
    let results: Vec<(Best, u64)> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut best = Best::none();
            let mut count = 0;
            let mut state = oracle.empty_state();
            let mut stack = vec![first];
            oracle.insert(&mut state, first);
            dfs(oracle, budget, &mut state, &mut stack, &mut best, &mut count);
            (best, count)
        })
        .collect();
    let evaluations = results.iter().map(|r| r.1).sum();
    let best = results.into_iter().map(|r| r.0).fold(Best::none(), Best::merge);
    (best, evaluations)
}

fn dfs<S: SetFunction + ?Sized>(
    oracle: &S,
    budget: usize,
    state: &mut S::State,
    stack: &mut Vec<usize>,
    best: &mut Best,
    count: &mut u64,
) {
    *count += 1;
    best.offer(oracle.value(state), || stack.clone());
    if stack.len() == budget {
        return;
    }
    let last = *stack.last().unwrap();
    for next in last + 1..oracle.ground_size() {
        oracle.insert(state, next);
        stack.push(next);
        dfs(oracle, budget, state, stack, best, count);
        stack.pop();
        oracle.remove(state, next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::NaiveSetFunction;

    fn brute(n: usize, budget: usize, f: &dyn Fn(&[usize]) -> f64) -> (f64, Vec<usize>) {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for mask in 1u32..1 << n {
            let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if s.len() > budget {
                continue;
            }
            let v = f(&s);
            let tie = (v - best.0).abs() <= 1e-9;
            let better = (v > best.0 && !tie)
                || (tie && (s.len() < best.1.len() || (s.len() == best.1.len() && s < best.1)));
            if better {
                best = (v, s);
            }
        }
        best
    }

    fn wavy(s: &[usize]) -> f64 {
        s.iter().map(|&i| ((i * 7 % 5) as f64) - 1.5).sum::<f64>() - 0.3 * (s.len() as f64).powi(2)
    }

    #[test]
    fn unbudgeted_matches_brute_force() {
        let f = NaiveSetFunction::new(9, wavy);
        let r = exact_enumerate(&f, None).unwrap();
        let (v, s) = brute(9, 9, &wavy);
        assert_eq!(r.open, s);
        assert_eq!(r.value, v);
        assert_eq!(r.evaluations, 511);
    }

    #[test]
    fn budgeted_matches_brute_force() {
        let f = NaiveSetFunction::new(9, wavy);
        for b in 1..9 {
            let r = exact_enumerate(&f, Some(b)).unwrap();
            let (v, s) = brute(9, b, &wavy);
            assert_eq!(r.open, s, "budget {b}");
            assert_eq!(r.value, v);
            let expect: f64 = (1..=b).map(|k| binomial(9, k)).sum();
            assert_eq!(r.evaluations, expect as u64);
        }
    }

    #[test]
    fn ties_prefer_smaller_then_lexicographic() {
        let f = NaiveSetFunction::new(4, |s: &[usize]| if s.is_empty() { 0.0 } else { 1.0 });
        assert_eq!(exact_enumerate(&f, None).unwrap().open, vec![0]);
        assert_eq!(exact_enumerate(&f, Some(2)).unwrap().open, vec![0]);
    }

    #[test]
    fn singleton_ground_set() {
        let f = NaiveSetFunction::new(1, |s: &[usize]| -(s.len() as f64));
        let r = exact_enumerate(&f, None).unwrap();
        assert_eq!(r.open, vec![0]);
        assert_eq!(r.value, -1.0);
    }

    #[test]
    fn size_guards() {
        assert!(exact_feasible(25, None).is_ok());
        assert!(matches!(exact_feasible(26, None), Err(Error::InstanceTooLarge { .. })));
        assert!(exact_feasible(53, Some(4)).is_ok());
        assert!(exact_feasible(53, Some(5)).is_ok());
        assert!(exact_feasible(53, Some(6)).is_err());
        assert!(exact_feasible(30, Some(40)).is_err());
        let f = NaiveSetFunction::new(3, |s: &[usize]| s.len() as f64);
        assert!(exact_enumerate(&f, Some(0)).is_err());
        assert_eq!(exact_enumerate(&f, Some(7)).unwrap().open, vec![0, 1, 2]);
        assert_eq!(binomial(13, 5), 1287.0);
    }
}
