use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::partition::{Allocation, Partition};

use super::sort::tie_runs;
use super::{Ranked, Scores};

/// Index rule for geometric weights `β^n`.
///
/// Swapping adjacent blocks A, B changes the objective by
/// `β^off · (1 − β^|A|)(1 − β^|B|) · (r(A) − r(B))` with
/// `r(B) = Σ_j β^j s(B_j) / (1 − β^|B|)`, so any order with nonincreasing `r`
/// is optimal and the blocks inside a run of equal `r` are interchangeable.
/// Within such a run the agent index decides, then block index.
pub fn solve_geometric_index(partition: &Partition, scores: Scores<'_>, discount: &DiscountCurve) -> Result<Ranked> {
    let beta = discount
        .geometric_base()
        .ok_or_else(|| Error::contract("index rule requires a geometric discount"))?;
    scores.check(partition, discount)?;

    let index = |s: &[f64]| -> Vec<f64> {
        partition
            .blocks()
            .iter()
            .map(|block| {
                let mut w = 1.0;
                let mut num = 0.0;
                for &x in block {
                    num += w * s[x];
                    w *= beta;
                }
                num / (1.0 - w)
            })
            .collect()
    };
    let r = index(scores.objective);
    let r_agent = index(scores.agent);
    // Objective gap per unit index gap is at least (1 − β)^2 at offset 0.
    let scale = (1.0 - beta) * (1.0 - beta);
    let tol = scores.objective_tol() / scale;
    let tol_a = scores.agent_tol() / scale;

    let mut order: Vec<usize> = (0..partition.block_count()).collect();
    order.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    let mut tie_broken = false;
    for run in tie_runs(&order, |b| r[b], tol) {
        if run.len() > 1 {
            tie_broken = true;
        }
        let slice = &mut order[run];
        slice.sort_by(|&a, &b| r_agent[b].total_cmp(&r_agent[a]).then(a.cmp(&b)));
        for sub in tie_runs(slice, |b| r_agent[b], tol_a) {
            slice[sub].sort_unstable();
        }
    }
    Ok(Ranked {
        allocation: Allocation::new(partition, order)?,
        tie_broken,
    })
}
