use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::partition::{Allocation, Partition};

use super::{order_values, Ranked, Scores};

/// Largest block count the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_BLOCKS: usize = 8;

/// Ground truth: evaluates all `K!` block orders in lexicographic order and
/// applies the tie-break contract to the full candidate list.
pub fn brute_force_oracle(partition: &Partition, scores: Scores<'_>, discount: &DiscountCurve) -> Result<Ranked> {
    scores.check(partition, discount)?;
    let k = partition.block_count();
    if k > BRUTE_FORCE_MAX_BLOCKS {
        return Err(Error::contract(format!(
            "brute force refuses {k} blocks (at most {BRUTE_FORCE_MAX_BLOCKS})"
        )));
    }
    let weights = discount.weights();
    let mut order: Vec<usize> = (0..k).collect();
    let mut candidates = Vec::new();
    loop {
        let (obj, ag) = order_values(partition, &order, scores, weights);
        candidates.push((order.clone(), obj, ag));
        if !next_permutation(&mut order) {
            break;
        }
    }

    let tol = scores.objective_tol();
    let tol_a = scores.agent_tol();
    let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let optimal: Vec<_> = candidates.into_iter().filter(|c| c.1 >= best - tol).collect();
    let best_agent = optimal.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let tie_broken = optimal.len() > 1;
    let chosen = optimal
        .into_iter()
        .find(|c| c.2 >= best_agent - tol_a)
        .expect("the agent maximum is attained");
    Ok(Ranked {
        allocation: Allocation::new(partition, chosen.0)?,
        tie_broken,
    })
}

/// Advances to the next permutation in lexicographic order; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discount::{make_discount, DiscountSpec};

    #[test]
    fn permutations_in_lexicographic_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn single_block() {
        let p = Partition::single_block(3);
        let d = make_discount(&DiscountSpec::Dcg {}, 3).unwrap();
        let r = brute_force_oracle(&p, Scores::plain(&[1.0, 2.0, 3.0]), &d).unwrap();
        assert_eq!(r.allocation.block_order(), &[0]);
        assert!(!r.tie_broken);
    }

    #[test]
    fn singleton_example() {
        let p = Partition::singletons(3);
        let d = make_discount(
            &DiscountSpec::Custom {
                weights: vec![1.0, 0.5, 0.0],
            },
            3,
        )
        .unwrap();
        let r = brute_force_oracle(&p, Scores::plain(&[3.0, 1.0, 2.0]), &d).unwrap();
        assert_eq!(r.allocation.ranking(), &[0, 2, 1]);
    }

    #[test]
    fn refuses_large_inputs() {
        let p = Partition::singletons(9);
        let d = make_discount(&DiscountSpec::Dcg {}, 9).unwrap();
        assert!(matches!(
            brute_force_oracle(&p, Scores::plain(&[0.0; 9]), &d),
            Err(Error::Contract(_))
        ));
    }
}
