//! Test-only oracle: exhaustive enumeration written directly from the
//! definitions, sharing no code with the solver.

#![allow(dead_code)]

use pushpull::Partition;

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Objects in rank order for a block order.
pub fn expand(partition: &Partition, order: &[usize]) -> Vec<usize> {
    order.iter().flat_map(|&b| partition.block(b).iter().copied()).collect()
}

/// `Σ_n w_n · s(object at n)`.
pub fn value(ranking: &[usize], scores: &[f64], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for n in 0..ranking.len() {
        total += weights[n] * scores[ranking[n]];
    }
    total
}

/// Best `λ·U + (1 − λ)·V` over all block orders, with the `(U, V)` of the
/// first maximizer found after applying the pro-agent rule at tolerance `tol`.
pub fn enumerate_best(
    partition: &Partition,
    agent: &[f64],
    advocate: &[f64],
    weights: &[f64],
    lambda: f64,
) -> (f64, f64, f64) {
    let mut rows = Vec::new();
    for order in permutations(partition.block_count()) {
        let r = expand(partition, &order);
        let u = value(&r, agent, weights);
        let v = value(&r, advocate, weights);
        rows.push((lambda * u + (1.0 - lambda) * v, u, v));
    }
    let best = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    let top = rows
        .iter()
        .filter(|r| r.0 >= best - tol)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .copied()
        .unwrap();
    (best, top.1, top.2)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) + 1e-15
}
