//! Attention allocation under positional discounting.
//!
//! A platform ranks a catalog of objects for an agent by reordering the
//! blocks of a partition. Each rank carries a weight from a decreasing
//! discount curve. The platform maximizes `λ·E[U] + (1 − λ)·E[V]`, a mix of
//! the agent's and an advocate's expected value under its posterior over the
//! agent's type. Pull and push measure how much of each party's best
//! achievable value the chosen ranking actually delivers.
//!
//! Module map:
//! - [`discount`], [`partition`], [`instance`]: domain types and allocation values.
//! - [`inference`]: prior, signal channel, posteriors, garbling.
//! - [`solver`]: exact and heuristic optimizers with one tie-break contract.
//! - [`metrics`]: pull, push, frontiers, critical weights, population summaries.
//! - [`scenarios`]: seeded generators for aligned, anti-aligned, orthogonal and random instances.
//! - [`io`]: instance JSON, relevance-log CSV, frontier CSV and JSON reports.

pub mod discount;
pub mod error;
pub mod inference;
pub mod instance;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod scenarios;
pub mod selfcheck;
pub mod solver;

pub use discount::{make_discount, DiscountCurve, DiscountSpec};
pub use error::{Error, Result};
pub use inference::{expected_scores, garble, posterior, PosteriorModel, Side, SignalChannel};
pub use instance::{allocation_value, Instance, Matrix, TypeSpace, UtilityTable};
pub use metrics::{agency_metrics, aggregate, critical_lambda, frontier, AgencyMetrics, Frontier, Grid};
pub use partition::{is_refinement, Allocation, Catalog, Partition, Refinement, SplitSpec};
pub use solver::{combined_scores, solve, SolveRequest, SolveResult, Strategy};
