//! Pull and push: the share of technologically deliverable value the platform
//! actually delivers to the agent and to the advocate at weight `λ`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{expected_scores, garble, signal_posteriors, PosteriorModel, Side, SignalChannel};
use crate::instance::Instance;
use crate::partition::{is_refinement, Partition};
use crate::solver::{Problem, SolveResult, Strategy, DEFAULT_DP_LIMIT};

/// Values delivered at one weight, normalized by the best each party could get.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgencyMetrics {
    pub lambda: f64,
    #[serde(rename = "U_lambda")]
    pub u_lambda: f64,
    #[serde(rename = "V_lambda")]
    pub v_lambda: f64,
    #[serde(rename = "P_lambda")]
    pub p_lambda: f64,
    #[serde(rename = "U_1")]
    pub u_1: f64,
    #[serde(rename = "V_0")]
    pub v_0: f64,
    pub pull: f64,
    pub push: f64,
    pub degenerate_pull: bool,
    pub degenerate_push: bool,
}

impl AgencyMetrics {
    /// Builds the metrics from the solve at `λ` and the two reference optima.
    /// A zero reference value means nothing is deliverable; the ratio is then
    /// reported as 1 and flagged.
    pub fn from_values(lambda: f64, u_lambda: f64, v_lambda: f64, u_1: f64, v_0: f64) -> Self {
        let ratio = |num: f64, den: f64| if den > 0.0 { (num / den, false) } else { (1.0, true) };
        let (pull, degenerate_pull) = ratio(u_lambda, u_1);
        let (push, degenerate_push) = ratio(v_lambda, v_0);
        AgencyMetrics {
            lambda,
            u_lambda,
            v_lambda,
            p_lambda: u_lambda + v_lambda,
            u_1,
            v_0,
            pull,
            push,
            degenerate_pull,
            degenerate_push,
        }
    }
}

/// Solver settings shared by every metric computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub strategy: Strategy,
    pub dp_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            strategy: Strategy::Auto,
            dp_limit: DEFAULT_DP_LIMIT,
        }
    }
}

/// Expected scores under a posterior, ready to solve at any weight.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    agent: Vec<f64>,
    advocate: Vec<f64>,
    opts: SolveOptions,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, posterior: &PosteriorModel, opts: SolveOptions) -> Result<Self> {
        Ok(Evaluator {
            instance,
            agent: expected_scores(instance, posterior, Side::Agent)?,
            advocate: expected_scores(instance, posterior, Side::Advocate)?,
            opts,
        })
    }

    fn problem(&self) -> Problem<'_> {
        Problem {
            partition: self.instance.partition(),
            discount: self.instance.discount(),
            agent: &self.agent,
            advocate: &self.advocate,
        }
    }

    pub fn solve(&self, lambda: f64) -> Result<SolveResult> {
        self.problem().solve(lambda, self.opts.strategy, self.opts.dp_limit)
    }

    /// `(U_1, V_0)`: best agent value and best advocate value.
    pub fn references(&self) -> Result<(f64, f64)> {
        Ok((self.solve(1.0)?.agent_value, self.solve(0.0)?.advocate_value))
    }

    pub fn metrics(&self, lambda: f64) -> Result<AgencyMetrics> {
        let (u_1, v_0) = self.references()?;
        self.metrics_with(lambda, u_1, v_0)
    }

    fn metrics_with(&self, lambda: f64, u_1: f64, v_0: f64) -> Result<AgencyMetrics> {
        let r = self.solve(lambda)?;
        Ok(AgencyMetrics::from_values(
            lambda,
            r.agent_value,
            r.advocate_value,
            u_1,
            v_0,
        ))
    }

    pub fn frontier(&self, grid: Grid) -> Result<Frontier> {
        let lambdas = grid.points()?;
        let (u_1, v_0) = self.references()?;
        let points = lambdas
            .par_iter()
            .map(|&l| self.metrics_with(l, u_1, v_0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Frontier { points, grid })
    }
}

/// Pull and push at `λ`.
pub fn agency_metrics(instance: &Instance, posterior: &PosteriorModel, lambda: f64) -> Result<AgencyMetrics> {
    Evaluator::new(instance, posterior, SolveOptions::default())?.metrics(lambda)
}

/// Evenly spaced weights `min..=max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Grid { min, max, count }
    }

    /// The default 101-point grid over `[0, 1]`.
    pub fn unit(count: usize) -> Self {
        Grid::new(0.0, 1.0, count)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !(0.0..=1.0).contains(&self.min) || !(0.0..=1.0).contains(&self.max) || self.min >= self.max {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy 0 <= min < max <= 1, got {}:{}",
                self.min, self.max
            )));
        }
        let steps = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let i = i as f64;
                (self.min * (steps - i) + self.max * i) / steps
            })
            .collect())
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::unit(101)
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// Parses `MIN:MAX:COUNT`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::invalid(format!("grid must be MIN:MAX:COUNT, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        let g = Grid::new(min, max, count);
        g.points()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub points: Vec<AgencyMetrics>,
    pub grid: Grid,
}

/// Pull and push across a grid of weights.
pub fn frontier(instance: &Instance, posterior: &PosteriorModel, grid: Grid) -> Result<Frontier> {
    Evaluator::new(instance, posterior, SolveOptions::default())?.frontier(grid)
}

/// Default jump threshold, as a fraction of the pull range on the frontier.
pub const CRITICAL_JUMP_FRACTION: f64 = 0.25;

/// Weight at which pull jumps the most between consecutive grid points,
/// reported as the upper point of the jump. `None` unless the largest jump
/// exceeds `fraction` of the pull range.
pub fn critical_lambda(frontier: &Frontier, fraction: f64) -> Option<f64> {
    let pts = &frontier.points;
    if pts.len() < 3 {
        return None;
    }
    let lo = pts.iter().map(|p| p.pull).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.pull).fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range <= 1e-12 {
        return None;
    }
    let mut best = (0.0, 0);
    for (i, w) in pts.windows(2).enumerate() {
        let jump = (w[1].pull - w[0].pull).abs();
        if jump > best.0 {
            best = (jump, i + 1);
        }
    }
    (best.0 > fraction * range).then(|| pts[best.1].lambda)
}

/// Best agent and advocate values averaged over the signals of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub epsilon: f64,
    /// `Σ_s P(s) · U_1(posterior(s))`.
    #[serde(rename = "U_1")]
    pub u_1: f64,
    /// `Σ_s P(s) · V_0(posterior(s))`.
    #[serde(rename = "V_0")]
    pub v_0: f64,
}

/// Exact signal average of `U_1` and `V_0` under `channel`.
///
/// Signals inducing bit-identical posteriors are pooled and the pooled
/// probabilities renormalized, so an uninformative channel reproduces the
/// prior-only values exactly.
pub fn signal_average(instance: &Instance, channel: &SignalChannel, opts: SolveOptions) -> Result<(f64, f64)> {
    let mut pooled: Vec<(f64, PosteriorModel)> = Vec::new();
    for (p, post) in signal_posteriors(instance.types(), channel)? {
        match pooled.iter_mut().find(|(_, q)| q.weights == post.weights) {
            Some(slot) => slot.0 += p,
            None => pooled.push((p, post)),
        }
    }
    let total: f64 = pooled.iter().map(|(p, _)| p).sum();
    let mut u = 0.0;
    let mut v = 0.0;
    for (p, post) in &pooled {
        let (u_1, v_0) = Evaluator::new(instance, post, opts)?.references()?;
        u += p / total * u_1;
        v += p / total * v_0;
    }
    Ok((u, v))
}

/// Signal-averaged `U_1` and `V_0` along a garbling chain.
pub fn noise_sweep(
    instance: &Instance,
    channel: &SignalChannel,
    epsilons: &[f64],
    opts: SolveOptions,
) -> Result<Vec<NoisePoint>> {
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let (u_1, v_0) = signal_average(instance, &garble(channel, epsilon)?, opts)?;
            Ok(NoisePoint { epsilon, u_1, v_0 })
        })
        .collect()
}

/// Optimal objective under a partition and under a refinement of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinePoint {
    pub lambda: f64,
    pub coarse_objective: f64,
    pub refined_objective: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineComparison {
    pub points: Vec<RefinePoint>,
    #[serde(rename = "coarse_U_1")]
    pub coarse_u_1: f64,
    #[serde(rename = "refined_U_1")]
    pub refined_u_1: f64,
    #[serde(rename = "coarse_V_0")]
    pub coarse_v_0: f64,
    #[serde(rename = "refined_V_0")]
    pub refined_v_0: f64,
}

/// Solves the same utilities under the instance's partition and under
/// `refined`, which must be a refinement of it.
pub fn refine_compare(
    instance: &Instance,
    refined: &Partition,
    posterior: &PosteriorModel,
    grid: Grid,
    opts: SolveOptions,
) -> Result<RefineComparison> {
    if !is_refinement(instance.partition(), refined).holds() {
        return Err(Error::invalid(
            "refined partition must split blocks into contiguous, order-preserving runs",
        ));
    }
    let fine_instance = instance.with_partition(refined.clone())?;
    let coarse = Evaluator::new(instance, posterior, opts)?;
    let fine = Evaluator::new(&fine_instance, posterior, opts)?;
    let points = grid
        .points()?
        .par_iter()
        .map(|&lambda| {
            let c = coarse.solve(lambda)?.objective;
            let f = fine.solve(lambda)?.objective;
            Ok(RefinePoint {
                lambda,
                coarse_objective: c,
                refined_objective: f,
                delta: f - c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (coarse_u_1, coarse_v_0) = coarse.references()?;
    let (refined_u_1, refined_v_0) = fine.references()?;
    Ok(RefineComparison {
        points,
        coarse_u_1,
        refined_u_1,
        coarse_v_0,
        refined_v_0,
    })
}

/// Summary statistics of one quantity over a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    fn of(xs: &[f64]) -> Stats {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Stats {
            count: xs.len(),
            mean,
            variance,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub pull: Stats,
    pub push: Stats,
}

/// Difference of group means, `first − second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupGap {
    pub first: String,
    pub second: String,
    pub pull: f64,
    pub push: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub overall: GroupSummary,
    pub groups: BTreeMap<String, GroupSummary>,
    /// Every ordered pair of distinct groups, lexicographic.
    pub gaps: Vec<GroupGap>,
}

impl PopulationSummary {
    pub fn gap(&self, first: &str, second: &str) -> Option<&GroupGap> {
        self.gaps.iter().find(|g| g.first == first && g.second == second)
    }
}

/// Distribution of pull and push over a labeled population.
pub fn aggregate(population: &[(String, AgencyMetrics)]) -> Result<PopulationSummary> {
    if population.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty population"));
    }
    let summarize = |items: &[&AgencyMetrics]| {
        let pull: Vec<f64> = items.iter().map(|m| m.pull).collect();
        let push: Vec<f64> = items.iter().map(|m| m.push).collect();
        GroupSummary {
            pull: Stats::of(&pull),
            push: Stats::of(&push),
        }
    };
    let mut by_group: BTreeMap<&str, Vec<&AgencyMetrics>> = BTreeMap::new();
    for (label, m) in population {
        by_group.entry(label).or_default().push(m);
    }
    let all: Vec<&AgencyMetrics> = population.iter().map(|(_, m)| m).collect();
    let groups: BTreeMap<String, GroupSummary> = by_group.iter().map(|(k, v)| (k.to_string(), summarize(v))).collect();
    let mut gaps = Vec::new();
    for (a, ga) in &groups {
        for (b, gb) in &groups {
            if a != b {
                gaps.push(GroupGap {
                    first: a.clone(),
                    second: b.clone(),
                    pull: ga.pull.mean - gb.pull.mean,
                    push: ga.push.mean - gb.push.mean,
                });
            }
        }
    }
    Ok(PopulationSummary {
        overall: summarize(&all),
        groups,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(lambda: f64, pull: f64) -> AgencyMetrics {
        AgencyMetrics::from_values(lambda, pull, 1.0, 1.0, 1.0)
    }

    #[test]
    fn zero_references_are_degenerate() {
        let m = AgencyMetrics::from_values(0.3, 0.0, 2.0, 0.0, 4.0);
        assert_eq!(m.pull, 1.0);
        assert!(m.degenerate_pull);
        assert_eq!(m.push, 0.5);
        assert!(!m.degenerate_push);
        assert_eq!(m.p_lambda, 2.0);
    }

    #[test]
    fn grid_points_hit_the_midpoint() {
        let pts = Grid::unit(101).points().unwrap();
        assert_eq!(pts.len(), 101);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[50], 0.5);
        assert_eq!(pts[100], 1.0);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(Grid::unit(1).points().is_err());
        assert!(Grid::new(0.5, 0.2, 3).points().is_err());
    }

    #[test]
    fn grid_parses() {
        assert_eq!("0:1:11".parse::<Grid>().unwrap(), Grid::unit(11));
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:2:3".parse::<Grid>().is_err());
    }

    #[test]
    fn critical_lambda_on_a_step() {
        let pts: Vec<_> = (0..11)
            .map(|i| {
                let l = i as f64 / 10.0;
                point(l, if l < 0.5 { 0.4 } else { 1.0 })
            })
            .collect();
        let f = Frontier {
            points: pts,
            grid: Grid::unit(11),
        };
        assert_eq!(critical_lambda(&f, CRITICAL_JUMP_FRACTION), Some(0.5));
    }

    #[test]
    fn no_critical_lambda_for_flat_or_gradual() {
        let flat = Frontier {
            points: (0..5).map(|i| point(i as f64 / 4.0, 1.0)).collect(),
            grid: Grid::unit(5),
        };
        assert_eq!(critical_lambda(&flat, CRITICAL_JUMP_FRACTION), None);
        let ramp = Frontier {
            points: (0..11).map(|i| point(i as f64 / 10.0, 0.5 + i as f64 / 20.0)).collect(),
            grid: Grid::unit(11),
        };
        assert_eq!(critical_lambda(&ramp, CRITICAL_JUMP_FRACTION), None);
    }

    #[test]
    fn aggregate_two_groups() {
        let pop = vec![
            ("A".to_string(), AgencyMetrics::from_values(0.5, 0.4, 1.0, 1.0, 1.0)),
            ("B".to_string(), AgencyMetrics::from_values(0.5, 0.8, 1.0, 1.0, 1.0)),
        ];
        let s = aggregate(&pop).unwrap();
        assert!((s.overall.pull.mean - 0.6).abs() < 1e-15);
        let ab = s.gap("A", "B").unwrap().pull;
        let ba = s.gap("B", "A").unwrap().pull;
        assert!((ab + 0.4).abs() < 1e-15);
        assert_eq!(ab, -ba);
        assert_eq!(s.groups.values().map(|g| g.pull.count).sum::<usize>(), 2);
    }

    #[test]
    fn aggregate_single_and_replicated() {
        let one = vec![("g".to_string(), AgencyMetrics::from_values(0.5, 0.3, 0.2, 1.0, 1.0))];
        let s = aggregate(&one).unwrap();
        assert_eq!(s.overall.pull.mean, 0.3);
        assert_eq!(s.overall.pull.variance, 0.0);
        assert!(s.gaps.is_empty());

        let pop = vec![
            ("A".to_string(), AgencyMetrics::from_values(0.5, 0.25, 1.0, 1.0, 1.0)),
            ("B".to_string(), AgencyMetrics::from_values(0.5, 0.75, 0.5, 1.0, 1.0)),
        ];
        let doubled: Vec<_> = pop.iter().chain(pop.iter()).cloned().collect();
        let (a, b) = (aggregate(&pop).unwrap(), aggregate(&doubled).unwrap());
        assert_eq!(a.overall.pull.mean, b.overall.pull.mean);
        assert_eq!(a.overall.pull.variance, b.overall.pull.variance);
        assert_eq!(a.gaps, b.gaps);
        assert!(aggregate(&[]).is_err());
    }
}
