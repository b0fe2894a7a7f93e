use std::time::Instant;

use super::{SetFunction, SolveResult};
use crate::error::{Error, Result};

/// Upper bound on oracle queries made by [`threshold_greedy`]:
/// `n * ceil(log_{1/(1-eps)}(n/eps))`. Holds whenever the ceiling is at
/// least `n`, which covers every `n` of practical size at `eps <= 0.1`.
pub fn threshold_greedy_eval_ceiling(n: usize, eps: f64) -> u64 {
    let rounds = ((n as f64 / eps).ln() / (1.0 / (1.0 - eps)).ln()).ceil();
    n as u64 * rounds as u64
}

/// Descending-threshold greedy for a monotone submodular `oracle` under
/// `|X| <= budget`. Guarantees `f(X) >= (1 - 1/e - eps) * OPT`.
///
/// The threshold starts at the best singleton value `d` and shrinks by a
/// factor `1 - eps` per pass until it drops below `eps * d / n`. Each pass
/// admits every element whose marginal gain reaches the threshold.
pub fn threshold_greedy<S: SetFunction + ?Sized>(oracle: &S, budget: usize, eps: f64) -> Result<SolveResult> {
    let started = Instant::now();
    let n = oracle.ground_size();
    if n == 0 {
        return Err(Error::invalid("ground set is empty"));
    }
    if budget == 0 || budget > n {
        return Err(Error::invalid(format!("budget must be in 1..={n}, got {budget}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("epsilon must be in (0, 1), got {eps}")));
    }

    let empty = oracle.empty_state();
    let singles: Vec<f64> = (0..n).map(|i| oracle.gain_add(&empty, i)).collect();
    let mut evaluations = n as u64;
    let (mut top, mut d) = (0, singles[0]);
    for (i, &v) in singles.iter().enumerate() {
        if v > d {
            top = i;
            d = v;
        }
    }
    if d <= 0.0 {
        return Ok(SolveResult::from_positions(oracle, vec![top], evaluations, started, 0));
    }

    let mut state = oracle.empty_state();
    let mut chosen = Vec::with_capacity(budget);
    let floor = eps / n as f64 * d;
    let mut w = d;
    'passes: while w >= floor {
        for i in 0..n {
            if oracle.contains(&state, i) {
                continue;
            }
            let gain = if chosen.is_empty() {
                singles[i]
            } else {
                evaluations += 1;
                oracle.gain_add(&state, i)
            };
            if gain >= w {
                oracle.insert(&mut state, i);
                chosen.push(i);
                if chosen.len() == budget {
                    break 'passes;
                }
            }
        }
        w *= 1.0 - eps;
    }
    Ok(SolveResult::from_positions(oracle, chosen, evaluations, started, 0))
}
