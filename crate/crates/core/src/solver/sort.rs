use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::partition::{Allocation, Partition};

use super::{Ranked, Scores};

/// Optimal ranking for a partition of singletons: objects by descending
/// objective score, paired with the decreasing weights.
///
/// Ties follow the shared contract. Objects whose objective scores tie are
/// ordered by agent score; objects landing on a run of equal weights are
/// interchangeable, so each such run is listed in index order.
pub fn solve_singletons(partition: &Partition, scores: Scores<'_>, discount: &DiscountCurve) -> Result<Ranked> {
    if !partition.is_singletons() {
        return Err(Error::contract(
            "sort rule requires singleton blocks; use subset_dp for multi-object blocks",
        ));
    }
    scores.check(partition, discount)?;
    let obj = scores.objective;
    let agent = scores.agent;
    let (tol, tol_a) = (scores.objective_tol(), scores.agent_tol());

    // Work in block indices; block b holds object partition.block(b)[0].
    let object = |b: usize| partition.block(b)[0];
    let mut order: Vec<usize> = (0..partition.block_count()).collect();
    order.sort_by(|&a, &b| obj[object(b)].total_cmp(&obj[object(a)]).then(a.cmp(&b)));

    let mut tie_broken = false;
    for run in tie_runs(&order, |b| obj[object(b)], tol) {
        if run.len() > 1 {
            tie_broken = true;
        }
        let slice = &mut order[run];
        slice.sort_by(|&a, &b| agent[object(b)].total_cmp(&agent[object(a)]).then(a.cmp(&b)));
        for sub in tie_runs(slice, |b| agent[object(b)], tol_a) {
            slice[sub].sort_unstable();
        }
    }

    let weights = discount.weights();
    let mut start = 0;
    while start < weights.len() {
        let mut end = start + 1;
        while end < weights.len() && weights[end] == weights[start] {
            end += 1;
        }
        if end - start > 1 {
            tie_broken = true;
            order[start..end].sort_unstable();
        }
        start = end;
    }

    Ok(Ranked {
        allocation: Allocation::new(partition, order)?,
        tie_broken,
    })
}

/// Maximal runs of a descending sequence whose consecutive keys differ by at
/// most `tol`.
pub(super) fn tie_runs(order: &[usize], key: impl Fn(usize) -> f64, tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=order.len() {
        if i == order.len() || key(order[i - 1]) - key(order[i]) > tol {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}
