mod common;

use proptest::prelude::*;
use proptest::strategy::Strategy as _;

use common::{enumerate_best, rel_close};
use pushpull::inference::{expected_scores, PosteriorModel, Side};
use pushpull::metrics::{Evaluator, SolveOptions};
use pushpull::solver::DEFAULT_DP_LIMIT;
use pushpull::{
    allocation_value, make_discount, solve, Allocation, Catalog, DiscountSpec, Instance, Matrix, Partition,
    SolveRequest, Strategy, TypeSpace, UtilityTable,
};

#[derive(Debug, Clone)]
struct Case {
    m: usize,
    blocks: Vec<Vec<usize>>,
    prior: Vec<f64>,
    agent: Vec<Vec<f64>>,
    advocate: Vec<Vec<f64>>,
    weights: Vec<f64>,
    lambda: f64,
}

impl Case {
    fn instance(&self) -> Instance {
        let types = TypeSpace::new(
            (0..self.prior.len()).map(|t| format!("t{t}")).collect(),
            self.prior.clone(),
        )
        .unwrap();
        Instance::new(
            Catalog::numbered(self.m).unwrap(),
            Partition::new(self.blocks.clone(), self.m).unwrap(),
            types,
            UtilityTable::new(
                Matrix::from_rows(self.agent.clone()).unwrap(),
                Matrix::from_rows(self.advocate.clone()).unwrap(),
            )
            .unwrap(),
            make_discount(
                &DiscountSpec::Custom {
                    weights: self.weights.clone(),
                },
                self.m,
            )
            .unwrap(),
            None,
        )
        .unwrap()
    }
}

/// Values on a coarse lattice so exact ties are common.
fn score() -> impl proptest::strategy::Strategy<Value = f64> {
    prop_oneof![(0u8..5).prop_map(|x| x as f64 / 2.0), 0.0..3.0f64]
}

fn case(max_m: usize) -> impl proptest::strategy::Strategy<Value = Case> {
    (1..=max_m, 1..=3usize)
        .prop_flat_map(|(m, t): (usize, usize)| {
            (
                Just(m),
                Just(Vec::from_iter(0..m)).prop_shuffle(),
                proptest::collection::vec(any::<bool>(), m.saturating_sub(1)),
                proptest::collection::vec(1u8..10, t),
                proptest::collection::vec(proptest::collection::vec(score(), m), t),
                proptest::collection::vec(proptest::collection::vec(score(), m), t),
                proptest::collection::vec(prop_oneof![Just(1.0), 0.0..1.0f64], m.saturating_sub(1)),
                prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0..=1.0f64],
            )
        })
        .prop_map(|(m, order, cuts, prior, agent, advocate, ratios, lambda)| {
            let mut blocks = vec![vec![order[0]]];
            for i in 1..m {
                if cuts[i - 1] {
                    blocks.push(Vec::new());
                }
                blocks.last_mut().unwrap().push(order[i]);
            }
            let total: u32 = prior.iter().map(|&p| p as u32).sum();
            let prior = prior.iter().map(|&p| p as f64 / total as f64).collect();
            let mut weights = vec![1.0];
            for r in ratios {
                let last = *weights.last().unwrap();
                weights.push(last * r);
            }
            Case {
                m,
                blocks,
                prior,
                agent,
                advocate,
                weights,
                lambda,
            }
        })
}

fn scores(inst: &Instance) -> (Vec<f64>, Vec<f64>) {
    let post = PosteriorModel::prior(inst.types());
    (
        expected_scores(inst, &post, Side::Agent).unwrap(),
        expected_scores(inst, &post, Side::Advocate).unwrap(),
    )
}

fn relabel(c: &Case, perm: &[usize]) -> Case {
    // Object x becomes perm[x].
    let mut agent = c.agent.clone();
    let mut advocate = c.advocate.clone();
    for t in 0..c.prior.len() {
        for x in 0..c.m {
            agent[t][perm[x]] = c.agent[t][x];
            advocate[t][perm[x]] = c.advocate[t][x];
        }
    }
    Case {
        blocks: c.blocks.iter().map(|b| b.iter().map(|&x| perm[x]).collect()).collect(),
        agent,
        advocate,
        ..c.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_strategies_match_enumeration(c in case(7)) {
        let inst = c.instance();
        let (u, v) = scores(&inst);
        let (best, best_u, _) = enumerate_best(inst.partition(), &u, &v, &c.weights, c.lambda);
        let post = PosteriorModel::prior(inst.types());
        let mut strategies = vec![Strategy::Auto, Strategy::SubsetDp, Strategy::BruteForce];
        if inst.partition().is_singletons() {
            strategies.push(Strategy::Sort);
        }
        for s in strategies {
            let r = solve(&SolveRequest::new(&inst, &post, c.lambda).strategy(s)).unwrap();
            prop_assert!(rel_close(r.objective, best, 1e-9), "{s:?}: {} vs {best}", r.objective);
            prop_assert!(rel_close(r.agent_value, best_u, 1e-9), "{s:?}: agent {} vs {best_u}", r.agent_value);
        }
    }

    #[test]
    fn local_search_never_beats_exact(c in case(7)) {
        let inst = c.instance();
        let post = PosteriorModel::prior(inst.types());
        let exact = solve(&SolveRequest::new(&inst, &post, c.lambda).strategy(Strategy::SubsetDp)).unwrap();
        let local = solve(&SolveRequest::new(&inst, &post, c.lambda).strategy(Strategy::LocalSearch)).unwrap();
        prop_assert!(local.objective <= exact.objective + 1e-12 * exact.objective.abs().max(1.0));
    }

    #[test]
    fn allocation_value_is_linear(c in case(8), a in 0.0..4.0f64, b in 0.0..4.0f64) {
        let inst = c.instance();
        let (u, v) = scores(&inst);
        let alloc = Allocation::identity(inst.partition());
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = allocation_value(&alloc, &mix, inst.discount()).unwrap();
        let rhs = a * allocation_value(&alloc, &u, inst.discount()).unwrap()
            + b * allocation_value(&alloc, &v, inst.discount()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn expected_scores_are_linear_in_posterior(c in case(6), w in 0.0..=1.0f64) {
        let inst = c.instance();
        let n = c.prior.len();
        let p0 = PosteriorModel::point_mass(n, 0);
        let p1 = PosteriorModel::point_mass(n, n - 1);
        let mixed = PosteriorModel {
            weights: p0.weights.iter().zip(&p1.weights).map(|(a, b)| w * a + (1.0 - w) * b).collect(),
            observed_signal: None,
        };
        let e0 = expected_scores(&inst, &p0, Side::Agent).unwrap();
        let e1 = expected_scores(&inst, &p1, Side::Agent).unwrap();
        let em = expected_scores(&inst, &mixed, Side::Agent).unwrap();
        for i in 0..c.m {
            prop_assert!((em[i] - (w * e0[i] + (1.0 - w) * e1[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn positive_rescaling_keeps_the_allocation(c in case(7), k in prop_oneof![Just(2.0), Just(0.25), 0.1..10.0f64]) {
        let scaled = Case {
            agent: c.agent.iter().map(|r| r.iter().map(|x| x * k).collect()).collect(),
            advocate: c.advocate.iter().map(|r| r.iter().map(|x| x * k).collect()).collect(),
            ..c.clone()
        };
        let (a, b) = (c.instance(), scaled.instance());
        let pa = PosteriorModel::prior(a.types());
        let ra = solve(&SolveRequest::new(&a, &pa, c.lambda).strategy(Strategy::SubsetDp)).unwrap();
        let rb = solve(&SolveRequest::new(&b, &pa, c.lambda).strategy(Strategy::SubsetDp)).unwrap();
        prop_assert!(rel_close(rb.objective, k * ra.objective, 1e-9));
        let ma = Evaluator::new(&a, &pa, SolveOptions::default()).unwrap().metrics(c.lambda).unwrap();
        let mb = Evaluator::new(&b, &pa, SolveOptions::default()).unwrap().metrics(c.lambda).unwrap();
        prop_assert!((ma.pull - mb.pull).abs() <= 1e-9, "{} vs {}", ma.pull, mb.pull);
        prop_assert!((ma.push - mb.push).abs() <= 1e-9, "{} vs {}", ma.push, mb.push);
    }

    #[test]
    fn metrics_ignore_object_labels(c in case(7), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..c.m).collect();
        let mut s = seed;
        for i in (1..c.m).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let (a, b) = (c.instance(), relabel(&c, &perm).instance());
        let post = PosteriorModel::prior(a.types());
        let opts = SolveOptions { strategy: Strategy::SubsetDp, dp_limit: DEFAULT_DP_LIMIT };
        let ma = Evaluator::new(&a, &post, opts).unwrap().metrics(c.lambda).unwrap();
        let mb = Evaluator::new(&b, &post, opts).unwrap().metrics(c.lambda).unwrap();
        for (x, y) in [(ma.pull, mb.pull), (ma.u_lambda, mb.u_lambda), (ma.u_1, mb.u_1), (ma.v_0, mb.v_0)] {
            prop_assert!(rel_close(x, y, 1e-9), "{x} vs {y}");
        }
        if c.lambda < 1.0 {
            prop_assert!(rel_close(ma.push, mb.push, 1e-9));
        }
    }

    #[test]
    fn pull_and_push_stay_in_unit_interval(c in case(7)) {
        let inst = c.instance();
        let post = PosteriorModel::prior(inst.types());
        let m = Evaluator::new(&inst, &post, SolveOptions::default()).unwrap().metrics(c.lambda).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.pull));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.push));
        prop_assert_eq!(m.p_lambda, m.u_lambda + m.v_lambda);
    }
}

#[test]
fn local_search_gap_is_small_on_average() {
    use pushpull::scenarios::{generate, Dims, ScenarioKind, ScenarioSpec};
    let mut gaps = Vec::new();
    for seed in 0..60 {
        let spec = ScenarioSpec::new(ScenarioKind::Random, Dims::new(12, 9, 3, 0), seed);
        let inst = generate(&spec).unwrap();
        let post = PosteriorModel::prior(inst.types());
        let at = |s| {
            solve(&SolveRequest::new(&inst, &post, 0.5).strategy(s))
                .unwrap()
                .objective
        };
        let exact = at(Strategy::SubsetDp);
        let local = at(Strategy::LocalSearch);
        assert!(local <= exact + 1e-12);
        gaps.push((exact - local) / exact);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    eprintln!(
        "local search mean relative gap {mean:.3e}, worst {:.3e}",
        gaps.iter().cloned().fold(0.0, f64::max)
    );
    assert!(mean < 0.05);
}
