//! Optimal block orders for `λ·E[U] + (1 − λ)·E[V]`.
//!
//! Both expectations are linear in per-object scores, so every strategy works
//! on a single combined score vector plus the agent score vector, which it
//! needs for tie-breaking.
//!
//! Tie-break contract shared by every strategy: among objective maximizers,
//! prefer the largest agent value; among those, the lexicographically
//! smallest block order. Two objectives tie when they differ by at most
//! [`TIE_TOL`] after normalizing by the total absolute score mass.

mod brute;
mod dp;
mod geometric;
mod local;
mod sort;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::inference::{expected_scores, PosteriorModel, Side};
use crate::instance::{allocation_value, Instance};
use crate::partition::{Allocation, Partition};

pub use brute::{brute_force_oracle, BRUTE_FORCE_MAX_BLOCKS};
pub use dp::solve_subset_dp;
pub use geometric::solve_geometric_index;
pub use local::solve_local_search;
pub use sort::solve_singletons;

/// Absolute tie tolerance on normalized objectives.
pub const TIE_TOL: f64 = 1e-12;

/// Default largest block count handled by the subset DP.
pub const DEFAULT_DP_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    Sort,
    SubsetDp,
    GeometricIndex,
    LocalSearch,
    BruteForce,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Auto,
        Strategy::Sort,
        Strategy::SubsetDp,
        Strategy::GeometricIndex,
        Strategy::LocalSearch,
        Strategy::BruteForce,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::Sort => "sort",
            Strategy::SubsetDp => "subset_dp",
            Strategy::GeometricIndex => "geometric_index",
            Strategy::LocalSearch => "local_search",
            Strategy::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown strategy `{s}`")))
    }
}

/// Objective scores plus the agent scores used to break objective ties.
#[derive(Debug, Clone, Copy)]
pub struct Scores<'a> {
    pub objective: &'a [f64],
    pub agent: &'a [f64],
}

impl<'a> Scores<'a> {
    pub fn new(objective: &'a [f64], agent: &'a [f64]) -> Self {
        Scores { objective, agent }
    }

    /// Scores whose tie-break vector is the objective itself, so ties fall
    /// straight through to the lexicographic rule.
    pub fn plain(objective: &'a [f64]) -> Self {
        Scores {
            objective,
            agent: objective,
        }
    }

    fn check(&self, partition: &Partition, discount: &DiscountCurve) -> Result<()> {
        let m = partition.size();
        if self.objective.len() != m || self.agent.len() != m || discount.len() != m {
            return Err(Error::invalid(format!(
                "partition covers {m} objects, got {} objective scores, {} agent scores, {} weights",
                self.objective.len(),
                self.agent.len(),
                discount.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn objective_tol(&self) -> f64 {
        tolerance(self.objective)
    }

    pub(crate) fn agent_tol(&self) -> f64 {
        tolerance(self.agent)
    }
}

fn tolerance(scores: &[f64]) -> f64 {
    let mass: f64 = scores.iter().map(|s| s.abs()).sum();
    TIE_TOL * if mass > 0.0 { mass } else { 1.0 }
}

/// A block order chosen by a strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranked {
    pub allocation: Allocation,
    /// More than one allocation attained the optimal objective, so the
    /// tie-break contract decided the result.
    pub tie_broken: bool,
}

/// `λ·agent + (1 − λ)·advocate`, elementwise.
pub fn combined_scores(lambda: f64, agent: &[f64], advocate: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if agent.len() != advocate.len() {
        return Err(Error::invalid(format!(
            "agent scores have length {}, advocate scores {}",
            agent.len(),
            advocate.len()
        )));
    }
    // Exact at the endpoints.
    if lambda == 1.0 {
        return Ok(agent.to_vec());
    }
    if lambda == 0.0 {
        return Ok(advocate.to_vec());
    }
    Ok(agent
        .iter()
        .zip(advocate)
        .map(|(u, v)| lambda * u + (1.0 - lambda) * v)
        .collect())
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")))
    }
}

#[derive(Debug, Clone)]
pub struct SolveRequest<'a> {
    pub instance: &'a Instance,
    pub posterior: &'a PosteriorModel,
    pub lambda: f64,
    pub strategy: Strategy,
    pub dp_limit: usize,
}

impl<'a> SolveRequest<'a> {
    pub fn new(instance: &'a Instance, posterior: &'a PosteriorModel, lambda: f64) -> Self {
        SolveRequest {
            instance,
            posterior,
            lambda,
            strategy: Strategy::Auto,
            dp_limit: DEFAULT_DP_LIMIT,
        }
    }

    pub fn strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub lambda: f64,
    pub objective: f64,
    pub agent_value: f64,
    pub advocate_value: f64,
    pub strategy_used: Strategy,
    pub tie_broken: bool,
}

/// Solves a request end to end: expected scores under the posterior, then
/// the chosen strategy.
pub fn solve(req: &SolveRequest<'_>) -> Result<SolveResult> {
    check_lambda(req.lambda)?;
    let agent = expected_scores(req.instance, req.posterior, Side::Agent)?;
    let advocate = expected_scores(req.instance, req.posterior, Side::Advocate)?;
    let problem = Problem {
        partition: req.instance.partition(),
        discount: req.instance.discount(),
        agent: &agent,
        advocate: &advocate,
    };
    problem.solve(req.lambda, req.strategy, req.dp_limit)
}

/// Partition, discount, and per-object expected scores for both parties.
/// Solving it at many weights reuses the expectations.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub partition: &'a Partition,
    pub discount: &'a DiscountCurve,
    pub agent: &'a [f64],
    pub advocate: &'a [f64],
}

impl Problem<'_> {
    /// Strategy `auto` would pick for this problem.
    pub fn auto_strategy(&self, dp_limit: usize) -> Strategy {
        if self.partition.is_singletons() {
            Strategy::Sort
        } else if self.discount.geometric_base().is_some() {
            Strategy::GeometricIndex
        } else if self.partition.block_count() <= dp_limit {
            Strategy::SubsetDp
        } else {
            Strategy::LocalSearch
        }
    }

    pub fn solve(&self, lambda: f64, strategy: Strategy, dp_limit: usize) -> Result<SolveResult> {
        let combined = combined_scores(lambda, self.agent, self.advocate)?;
        let scores = Scores::new(&combined, self.agent);
        let strategy = match strategy {
            Strategy::Auto => self.auto_strategy(dp_limit),
            s => s,
        };
        let ranked = match strategy {
            Strategy::Sort => solve_singletons(self.partition, scores, self.discount)?,
            Strategy::SubsetDp => solve_subset_dp(self.partition, scores, self.discount, dp_limit)?,
            Strategy::GeometricIndex => solve_geometric_index(self.partition, scores, self.discount)?,
            Strategy::LocalSearch => {
                let seed = density_seed(self.partition, &combined);
                solve_local_search(self.partition, scores, self.discount, &seed)?
            }
            Strategy::BruteForce => brute_force_oracle(self.partition, scores, self.discount)?,
            Strategy::Auto => unreachable!("auto resolved above"),
        };
        let agent_value = allocation_value(&ranked.allocation, self.agent, self.discount)?;
        let advocate_value = allocation_value(&ranked.allocation, self.advocate, self.discount)?;
        Ok(SolveResult {
            allocation: ranked.allocation,
            lambda,
            objective: lambda * agent_value + (1.0 - lambda) * advocate_value,
            agent_value,
            advocate_value,
            strategy_used: strategy,
            tie_broken: ranked.tie_broken,
        })
    }
}

/// Blocks by descending mean score, ties by index.
pub fn density_seed(partition: &Partition, scores: &[f64]) -> Vec<usize> {
    let mean = |b: usize| {
        let block = partition.block(b);
        block.iter().map(|&x| scores[x]).sum::<f64>() / block.len() as f64
    };
    let mut order: Vec<usize> = (0..partition.block_count()).collect();
    order.sort_by(|&a, &b| mean(b).total_cmp(&mean(a)).then(a.cmp(&b)));
    order
}

/// Value contributed by block `b` when it starts at rank `offset`.
#[inline]
pub(crate) fn block_value(block: &[usize], offset: usize, scores: &[f64], weights: &[f64]) -> f64 {
    block
        .iter()
        .zip(&weights[offset..offset + block.len()])
        .map(|(&x, &w)| w * scores[x])
        .sum()
}

/// Total objective and agent value of a block order.
pub(crate) fn order_values(partition: &Partition, order: &[usize], scores: Scores<'_>, weights: &[f64]) -> (f64, f64) {
    let mut offset = 0;
    let (mut obj, mut ag) = (0.0, 0.0);
    for &b in order {
        let block = partition.block(b);
        obj += block_value(block, offset, scores.objective, weights);
        ag += block_value(block, offset, scores.agent, weights);
        offset += block.len();
    }
    (obj, ag)
}
