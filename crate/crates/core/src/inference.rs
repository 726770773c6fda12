//! The platform's model of the agent: a prior over types, a signal channel,
//! and the posteriors they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::instance::{check_probability_vector, Instance, Matrix, TypeSpace};

/// Conditional signal distribution `P(signal | type)`, one row per type.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalChannel {
    signals: Vec<String>,
    likelihood: Matrix,
}

impl SignalChannel {
    pub fn new(signals: Vec<String>, likelihood: Matrix) -> Result<Self> {
        let mut v = Violations::new();
        if signals.is_empty() {
            v.push("at least one signal is required");
        }
        if likelihood.cols() != signals.len() {
            v.push(format!(
                "likelihood has {} columns for {} signals",
                likelihood.cols(),
                signals.len()
            ));
        }
        for r in 0..likelihood.rows() {
            v.absorb(
                &format!("likelihood row {r}"),
                check_probability_vector(likelihood.row(r)),
            );
        }
        v.finish()?;
        Ok(SignalChannel { signals, likelihood })
    }

    /// A channel whose signal `s{i}` reveals type `i` exactly.
    pub fn revealing(types: usize) -> Self {
        let mut m = Matrix::filled(types, types, 0.0);
        for t in 0..types {
            m.row_mut(t)[t] = 1.0;
        }
        SignalChannel {
            signals: (0..types).map(|i| format!("s{i}")).collect(),
            likelihood: m,
        }
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn likelihood(&self) -> &Matrix {
        &self.likelihood
    }

    pub fn signal_index(&self, id: &str) -> Option<usize> {
        self.signals.iter().position(|s| s == id)
    }
}

/// Posterior over types, optionally tagged with the signal it conditions on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorModel {
    pub weights: Vec<f64>,
    pub observed_signal: Option<String>,
}

impl PosteriorModel {
    /// The prior itself, with no signal observed.
    pub fn prior(types: &TypeSpace) -> Self {
        PosteriorModel {
            weights: types.prior().to_vec(),
            observed_signal: None,
        }
    }

    /// All mass on type `t` of `n`.
    pub fn point_mass(n: usize, t: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[t] = 1.0;
        PosteriorModel {
            weights,
            observed_signal: None,
        }
    }
}

/// Bayes update of the prior on observing `signal`.
pub fn posterior(types: &TypeSpace, channel: &SignalChannel, signal: &str) -> Result<PosteriorModel> {
    let s = channel
        .signal_index(signal)
        .ok_or_else(|| Error::invalid(format!("unknown signal `{signal}`")))?;
    if channel.likelihood().rows() != types.len() {
        return Err(Error::invalid(format!(
            "channel has {} rows for {} types",
            channel.likelihood().rows(),
            types.len()
        )));
    }
    let column: Vec<f64> = (0..types.len()).map(|t| channel.likelihood().get(t, s)).collect();
    let weights = bayes(types.prior(), &column).ok_or_else(|| Error::ImpossibleSignal(signal.to_string()))?;
    Ok(PosteriorModel {
        weights,
        observed_signal: Some(signal.to_string()),
    })
}

/// Normalized `prior · likelihood`, or `None` when the product has no mass.
fn bayes(prior: &[f64], likelihood: &[f64]) -> Option<Vec<f64>> {
    let unnorm: Vec<f64> = prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let total: f64 = unnorm.iter().sum();
    if total <= 0.0 {
        return None;
    }
    // A likelihood that is constant over the prior's support carries no
    // information; return the prior bit-for-bit.
    let mut support = prior.iter().zip(likelihood).filter(|(p, _)| **p > 0.0).map(|(_, l)| *l);
    if let Some(first) = support.next() {
        if support.all(|l| l == first) {
            return Some(prior.to_vec());
        }
    }
    Some(unnorm.into_iter().map(|x| x / total).collect())
}

/// Which party's utilities to score objects by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Agent,
    Advocate,
}

/// Posterior-expected utility of each object: `Σ_θ w(θ) · u(θ, x)`.
pub fn expected_scores(instance: &Instance, posterior: &PosteriorModel, side: Side) -> Result<Vec<f64>> {
    let table = match side {
        Side::Agent => instance.utilities().agent(),
        Side::Advocate => instance.utilities().advocate(),
    };
    if posterior.weights.len() != table.rows() {
        return Err(Error::invalid(format!(
            "posterior has {} weights for {} types",
            posterior.weights.len(),
            table.rows()
        )));
    }
    let mut out = vec![0.0; table.cols()];
    for (w, row) in posterior.weights.iter().zip(table.iter_rows()) {
        if *w == 0.0 {
            continue;
        }
        for (o, u) in out.iter_mut().zip(row) {
            *o += w * u;
        }
    }
    Ok(out)
}

/// Mixes every likelihood row toward the uniform distribution:
/// `(1 − ε)·P + ε·uniform`. Larger `ε` is a Blackwell garbling of smaller.
pub fn garble(channel: &SignalChannel, epsilon: f64) -> Result<SignalChannel> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let n = channel.signals.len();
    let uniform = 1.0 / n as f64;
    let mut likelihood = channel.likelihood.clone();
    for r in 0..likelihood.rows() {
        for x in likelihood.row_mut(r) {
            *x = if epsilon == 1.0 {
                uniform
            } else {
                (1.0 - epsilon) * *x + epsilon * uniform
            };
        }
    }
    Ok(SignalChannel {
        signals: channel.signals.clone(),
        likelihood,
    })
}

/// Each feasible signal with its marginal probability and induced posterior.
/// Signals of zero marginal probability are skipped.
pub fn signal_posteriors(types: &TypeSpace, channel: &SignalChannel) -> Result<Vec<(f64, PosteriorModel)>> {
    let mut out = Vec::new();
    for (s, id) in channel.signals().iter().enumerate() {
        let prob: f64 = types
            .prior()
            .iter()
            .enumerate()
            .map(|(t, p)| p * channel.likelihood().get(t, s))
            .sum();
        if prob <= 0.0 {
            continue;
        }
        out.push((prob, posterior(types, channel, id)?));
    }
    Ok(out)
}
