//! Positional attention weights.
//!
//! A curve assigns each 0-based rank `n` a weight `δ_n` in `[0, 1]` with
//! `δ_0 = 1` and weights weakly decreasing in `n`. The curve is truncated to
//! the catalog size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric description of a discount curve, independent of horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DiscountSpec {
    /// `δ_n = 1 / log2(n + 2)`.
    Dcg {},
    /// `δ_n = 1` for the first `n` ranks, `0` afterwards.
    Cutoff { n: usize },
    /// `δ_n = beta^n`.
    Geometric { beta: f64 },
    /// Explicit weight table; its length must equal the horizon.
    Custom { weights: Vec<f64> },
}

impl DiscountSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DiscountSpec::Dcg {} => "dcg",
            DiscountSpec::Cutoff { .. } => "cutoff",
            DiscountSpec::Geometric { .. } => "geometric",
            DiscountSpec::Custom { .. } => "custom",
        }
    }
}

impl std::str::FromStr for DiscountSpec {
    type Err = Error;

    /// Parses `dcg`, `cutoff:N`, `geometric:BETA` or `custom:W0,W1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unrecognized discount `{s}`"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (kind, arg) {
            ("dcg", None) => Ok(DiscountSpec::Dcg {}),
            ("cutoff", Some(a)) => Ok(DiscountSpec::Cutoff {
                n: a.parse().map_err(|_| bad())?,
            }),
            ("geometric", Some(a)) => Ok(DiscountSpec::Geometric {
                beta: a.parse().map_err(|_| bad())?,
            }),
            ("custom", Some(a)) => Ok(DiscountSpec::Custom {
                weights: a
                    .split(',')
                    .map(|w| w.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            }),
            _ => Err(bad()),
        }
    }
}

/// A validated weight table of length `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    spec: DiscountSpec,
    weights: Vec<f64>,
}

/// Builds the curve for `spec` over `horizon` ranks.
pub fn make_discount(spec: &DiscountSpec, horizon: usize) -> Result<DiscountCurve> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let weights: Vec<f64> = match spec {
        DiscountSpec::Dcg {} => (0..horizon).map(|n| 1.0 / (n as f64 + 2.0).log2()).collect(),
        DiscountSpec::Cutoff { n } => {
            if *n < 1 {
                return Err(Error::invalid("cutoff length must be at least 1"));
            }
            (0..horizon).map(|i| if i < *n { 1.0 } else { 0.0 }).collect()
        }
        DiscountSpec::Geometric { beta } => {
            if !(*beta > 0.0 && *beta < 1.0) {
                return Err(Error::invalid(format!("geometric base must lie in (0, 1), got {beta}")));
            }
            let mut w = Vec::with_capacity(horizon);
            let mut cur = 1.0;
            for _ in 0..horizon {
                w.push(cur);
                cur *= beta;
            }
            w
        }
        DiscountSpec::Custom { weights } => {
            check_table(weights, horizon)?;
            weights.clone()
        }
    };
    Ok(DiscountCurve {
        spec: spec.clone(),
        weights,
    })
}

fn check_table(weights: &[f64], horizon: usize) -> Result<()> {
    let mut errs = Vec::new();
    if weights.len() != horizon {
        errs.push(format!("weight table has length {}, expected {horizon}", weights.len()));
    }
    if let Some(&w0) = weights.first() {
        if w0 != 1.0 {
            errs.push(format!("first weight must be 1, got {w0}"));
        }
    }
    for (n, &w) in weights.iter().enumerate() {
        if !w.is_finite() || !(0.0..=1.0).contains(&w) {
            errs.push(format!("weight {n} = {w} lies outside [0, 1]"));
        }
    }
    for (n, pair) in weights.windows(2).enumerate() {
        if pair[1] > pair[0] {
            errs.push(format!(
                "weights must be weakly decreasing: weight {} = {} exceeds weight {n} = {}",
                n + 1,
                pair[1],
                pair[0]
            ));
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errs))
    }
}

impl DiscountCurve {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spec(&self) -> &DiscountSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    /// Base of a geometric curve, if this is one.
    pub fn geometric_base(&self) -> Option<f64> {
        match self.spec {
            DiscountSpec::Geometric { beta } => Some(beta),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dcg_first_rank_is_one() {
        let c = make_discount(&DiscountSpec::Dcg {}, 3).unwrap();
        assert_eq!(c.weight(0), 1.0);
        assert_eq!(c.weight(2), 0.5);
    }

    #[test]
    fn cutoff_is_zero_based() {
        let c = make_discount(&DiscountSpec::Cutoff { n: 2 }, 4).unwrap();
        assert_eq!(c.weights(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn geometric_sequence() {
        let c = make_discount(&DiscountSpec::Geometric { beta: 0.5 }, 3).unwrap();
        assert_eq!(c.weights(), &[1.0, 0.5, 0.25]);
        assert_eq!(c.geometric_base(), Some(0.5));
    }

    #[test]
    fn rejects_bad_params() {
        for beta in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(make_discount(&DiscountSpec::Geometric { beta }, 3).is_err());
        }
        assert!(make_discount(&DiscountSpec::Cutoff { n: 0 }, 3).is_err());
        assert!(make_discount(&DiscountSpec::Dcg {}, 0).is_err());
    }

    #[test]
    fn custom_table_reports_every_violation() {
        let err = make_discount(
            &DiscountSpec::Custom {
                weights: vec![0.9, 1.0, 1.2],
            },
            3,
        )
        .unwrap_err();
        let v = err.violations();
        assert!(v.iter().any(|m| m.contains("first weight")));
        assert!(v.iter().any(|m| m.contains("outside [0, 1]")));
        assert!(v.iter().any(|m| m.contains("weakly decreasing")));
    }

    #[test]
    fn custom_table_accepts_plateaus() {
        let c = make_discount(
            &DiscountSpec::Custom {
                weights: vec![1.0, 0.5, 0.5, 0.0],
            },
            4,
        )
        .unwrap();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn parses_short_forms() {
        assert_eq!("dcg".parse::<DiscountSpec>().unwrap(), DiscountSpec::Dcg {});
        assert_eq!(
            "cutoff:3".parse::<DiscountSpec>().unwrap(),
            DiscountSpec::Cutoff { n: 3 }
        );
        assert_eq!(
            "geometric:0.5".parse::<DiscountSpec>().unwrap(),
            DiscountSpec::Geometric { beta: 0.5 }
        );
        assert_eq!(
            "custom:1,0.5,0".parse::<DiscountSpec>().unwrap(),
            DiscountSpec::Custom {
                weights: vec![1.0, 0.5, 0.0]
            }
        );
        for bad in ["cutoff", "dcg:1", "geometric:x", "linear:2"] {
            assert!(bad.parse::<DiscountSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn spec_json_shape() {
        let s = serde_json::to_string(&DiscountSpec::Cutoff { n: 2 }).unwrap();
        assert_eq!(s, r#"{"kind":"cutoff","params":{"n":2}}"#);
        let d: DiscountSpec = serde_json::from_str(r#"{"kind":"dcg","params":{}}"#).unwrap();
        assert_eq!(d, DiscountSpec::Dcg {});
    }
}
