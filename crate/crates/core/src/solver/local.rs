use std::cmp::Ordering;

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::partition::{Allocation, Partition};

use super::{block_value, Ranked, Scores};

/// Adjacent-transposition hill climbing from `seed`.
///
/// A swap is taken when it improves the objective, or ties the objective and
/// improves agent value, or ties both and moves the smaller block index
/// first. The result admits no such swap. Deterministic given the seed.
pub fn solve_local_search(
    partition: &Partition,
    scores: Scores<'_>,
    discount: &DiscountCurve,
    seed: &[usize],
) -> Result<Ranked> {
    scores.check(partition, discount)?;
    let k = partition.block_count();
    // Validates the seed.
    Allocation::new(partition, seed.to_vec())?;
    let weights = discount.weights();
    let (tol, tol_a) = (scores.objective_tol(), scores.agent_tol());
    let mut order = seed.to_vec();

    // Outcome of swapping positions i, i+1 (blocks a then b at `off`).
    let compare = |a: usize, b: usize, off: usize| -> (Ordering, bool) {
        let (ba, bb) = (partition.block(a), partition.block(b));
        let value = |s: &[f64], first: &[usize], second: &[usize]| {
            block_value(first, off, s, weights) + block_value(second, off + first.len(), s, weights)
        };
        let keep = value(scores.objective, ba, bb);
        let swap = value(scores.objective, bb, ba);
        if swap > keep + tol {
            return (Ordering::Greater, false);
        }
        if swap < keep - tol {
            return (Ordering::Less, false);
        }
        let keep_a = value(scores.agent, ba, bb);
        let swap_a = value(scores.agent, bb, ba);
        let ord = if swap_a > keep_a + tol_a {
            Ordering::Greater
        } else if swap_a < keep_a - tol_a {
            Ordering::Less
        } else {
            a.cmp(&b)
        };
        (ord, true)
    };

    let max_passes = 4 * k * k + 16;
    let mut passes = 0;
    loop {
        let mut moved = false;
        let mut off = 0;
        for i in 0..k.saturating_sub(1) {
            let (a, b) = (order[i], order[i + 1]);
            if compare(a, b, off).0 == Ordering::Greater {
                order.swap(i, i + 1);
                moved = true;
            }
            off += partition.block(order[i]).len();
        }
        passes += 1;
        if !moved {
            break;
        }
        if passes >= max_passes {
            return Err(Error::contract(format!(
                "local search did not settle within {max_passes} passes"
            )));
        }
    }

    let mut tie_broken = false;
    let mut off = 0;
    for i in 0..k.saturating_sub(1) {
        if compare(order[i], order[i + 1], off).1 {
            tie_broken = true;
        }
        off += partition.block(order[i]).len();
    }
    Ok(Ranked {
        allocation: Allocation::new(partition, order)?,
        tie_broken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discount::{make_discount, DiscountSpec};
    use crate::instance::allocation_value;

    #[test]
    fn optimal_seed_is_a_fixed_point() {
        let p = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let d = make_discount(
            &DiscountSpec::Custom {
                weights: vec![1.0, 0.5, 0.25],
            },
            3,
        )
        .unwrap();
        let r = solve_local_search(&p, Scores::plain(&[0.0, 5.0, 3.0]), &d, &[1, 0]).unwrap();
        assert_eq!(r.allocation.block_order(), &[1, 0]);
    }

    #[test]
    fn improves_on_seed() {
        let p = Partition::singletons(4);
        let d = make_discount(&DiscountSpec::Dcg {}, 4).unwrap();
        let s = [1.0, 4.0, 2.0, 3.0];
        let seed = Allocation::new(&p, vec![0, 2, 3, 1]).unwrap();
        let r = solve_local_search(&p, Scores::plain(&s), &d, seed.block_order()).unwrap();
        assert_eq!(r.allocation.ranking(), &[1, 3, 2, 0]);
        assert!(allocation_value(&r.allocation, &s, &d).unwrap() >= allocation_value(&seed, &s, &d).unwrap());
    }

    #[test]
    fn rejects_bad_seed() {
        let p = Partition::singletons(3);
        let d = make_discount(&DiscountSpec::Dcg {}, 3).unwrap();
        assert!(solve_local_search(&p, Scores::plain(&[0.0; 3]), &d, &[0, 0, 1]).is_err());
    }
}
