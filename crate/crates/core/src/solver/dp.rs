use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::partition::{Allocation, Partition};

use super::{block_value, Ranked, Scores};

/// Exact optimum by dynamic programming over subsets of placed blocks.
///
/// The rank at which the next block starts depends only on which blocks are
/// already placed (the sum of their lengths), not on their order, so the
/// best value-to-go is a function of the placed set. `O(2^K · K)` states and
/// transitions.
///
/// A second pass over the same states maximizes agent value among
/// objective-tight transitions; the forward reconstruction then takes the
/// smallest block index that stays tight on both, which yields the
/// lexicographically smallest order among tied optima.
pub fn solve_subset_dp(
    partition: &Partition,
    scores: Scores<'_>,
    discount: &DiscountCurve,
    limit: usize,
) -> Result<Ranked> {
    scores.check(partition, discount)?;
    let k = partition.block_count();
    if k > limit || k >= usize::BITS as usize {
        return Err(Error::contract(format!(
            "subset DP handles at most {limit} blocks, got {k}; use local_search"
        )));
    }
    let weights = discount.weights();
    let m = partition.size();
    let lens: Vec<usize> = partition.blocks().iter().map(Vec::len).collect();

    // Contribution of block b starting at each feasible offset.
    let table = |s: &[f64]| -> Vec<Vec<f64>> {
        partition
            .blocks()
            .iter()
            .map(|block| {
                (0..=m - block.len())
                    .map(|off| block_value(block, off, s, weights))
                    .collect()
            })
            .collect()
    };
    let obj = table(scores.objective);
    let ag = table(scores.agent);
    let (tol, tol_a) = (scores.objective_tol(), scores.agent_tol());

    let full: usize = (1 << k) - 1;
    let states = full + 1;
    let mut offset = vec![0u32; states];
    for mask in 1..states {
        let low = mask.trailing_zeros() as usize;
        offset[mask] = offset[mask & (mask - 1)] + lens[low] as u32;
    }

    // best[S]: max objective-to-go with S placed. agent[S]: max agent
    // value-to-go along objective-tight moves. paths[S]: tight completions,
    // saturating at 2.
    let mut best = vec![0.0f64; states];
    let mut agent = vec![0.0f64; states];
    let mut paths = vec![0u8; states];
    paths[full] = 1;
    for mask in (0..full).rev() {
        let off = offset[mask] as usize;
        let mut f = f64::NEG_INFINITY;
        for b in 0..k {
            if mask & (1 << b) == 0 {
                f = f.max(obj[b][off] + best[mask | (1 << b)]);
            }
        }
        best[mask] = f;
        let mut g = f64::NEG_INFINITY;
        let mut n = 0u8;
        for b in 0..k {
            let next = mask | (1 << b);
            if mask & (1 << b) == 0 && obj[b][off] + best[next] >= f - tol {
                g = g.max(ag[b][off] + agent[next]);
                n = n.saturating_add(paths[next]).min(2);
            }
        }
        agent[mask] = g;
        paths[mask] = n;
    }

    let mut order = Vec::with_capacity(k);
    let mut mask = 0usize;
    while mask != full {
        let off = offset[mask] as usize;
        let pick = (0..k)
            .find(|&b| {
                let next = mask | (1 << b);
                mask & (1 << b) == 0
                    && obj[b][off] + best[next] >= best[mask] - tol
                    && ag[b][off] + agent[next] >= agent[mask] - tol_a
            })
            .expect("some transition attains the optimum");
        order.push(pick);
        mask |= 1 << pick;
    }

    Ok(Ranked {
        allocation: Allocation::new(partition, order)?,
        tie_broken: paths[0] > 1,
    })
}
