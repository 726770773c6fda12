//! Problem instances and allocation values.

use crate::discount::DiscountCurve;
use crate::error::{Error, Result, Violations};
use crate::inference::SignalChannel;
use crate::partition::{Allocation, Catalog, Partition};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::invalid(format!(
                "row {r} has length {}, expected {cols}",
                row.len()
            )));
        }
        let n = rows.len();
        Ok(Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }
}

/// Tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-9;

pub(crate) fn check_probability_vector(p: &[f64]) -> Result<()> {
    let mut errs = Vec::new();
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            errs.push(format!("entry {i} = {x} is not a nonnegative number"));
        }
    }
    let total: f64 = p.iter().sum();
    if errs.is_empty() && (total - 1.0).abs() > PROB_TOL {
        errs.push(format!("entries sum to {total}, expected 1"));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errs))
    }
}

/// Latent agent types with a prior.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSpace {
    ids: Vec<String>,
    prior: Vec<f64>,
}

impl TypeSpace {
    pub fn new(ids: Vec<String>, prior: Vec<f64>) -> Result<Self> {
        let mut v = Violations::new();
        if ids.is_empty() {
            v.push("at least one type is required");
        }
        let mut sorted = ids.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                v.push(format!("duplicate type id `{}`", w[0]));
            }
        }
        if prior.len() != ids.len() {
            v.push(format!("prior has {} entries for {} types", prior.len(), ids.len()));
        } else {
            v.absorb("prior", check_probability_vector(&prior));
        }
        v.finish()?;
        Ok(TypeSpace { ids, prior })
    }

    /// A single type with unit prior mass.
    pub fn single(id: impl Into<String>) -> Self {
        TypeSpace {
            ids: vec![id.into()],
            prior: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|t| t == id)
    }
}

/// Agent and advocate utilities, one row per type, one column per object.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    agent: Matrix,
    advocate: Matrix,
}

impl UtilityTable {
    pub fn new(agent: Matrix, advocate: Matrix) -> Result<Self> {
        let mut v = Violations::new();
        for (name, m) in [("agent_u", &agent), ("advocate_v", &advocate)] {
            for r in 0..m.rows() {
                for (c, &x) in m.row(r).iter().enumerate() {
                    if !x.is_finite() || x < 0.0 {
                        v.push(format!("{name}[{r}][{c}] = {x} must be a nonnegative number"));
                    }
                }
            }
        }
        if agent.rows() != advocate.rows() || agent.cols() != advocate.cols() {
            v.push(format!(
                "agent_u is {}x{} but advocate_v is {}x{}",
                agent.rows(),
                agent.cols(),
                advocate.rows(),
                advocate.cols()
            ));
        }
        v.finish()?;
        Ok(UtilityTable { agent, advocate })
    }

    pub fn agent(&self) -> &Matrix {
        &self.agent
    }

    pub fn advocate(&self) -> &Matrix {
        &self.advocate
    }
}

/// A complete, validated problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    catalog: Catalog,
    partition: Partition,
    types: TypeSpace,
    utilities: UtilityTable,
    discount: DiscountCurve,
    signal_model: Option<SignalChannel>,
}

impl Instance {
    pub fn new(
        catalog: Catalog,
        partition: Partition,
        types: TypeSpace,
        utilities: UtilityTable,
        discount: DiscountCurve,
        signal_model: Option<SignalChannel>,
    ) -> Result<Self> {
        let m = catalog.len();
        let mut v = Violations::new();
        if partition.size() != m {
            v.push(format!(
                "partition: covers {} objects, catalog has {m}",
                partition.size()
            ));
        }
        for (name, mat) in [("agent_u", utilities.agent()), ("advocate_v", utilities.advocate())] {
            if mat.rows() != types.len() || mat.cols() != m {
                v.push(format!(
                    "{name}: is {}x{}, expected {}x{m}",
                    mat.rows(),
                    mat.cols(),
                    types.len()
                ));
            }
        }
        if discount.len() != m {
            v.push(format!("discount: has {} weights, catalog has {m}", discount.len()));
        }
        if let Some(ch) = &signal_model {
            if ch.likelihood().rows() != types.len() {
                v.push(format!(
                    "signal_model: likelihood has {} rows for {} types",
                    ch.likelihood().rows(),
                    types.len()
                ));
            }
        }
        v.finish()?;
        Ok(Instance {
            catalog,
            partition,
            types,
            utilities,
            discount,
            signal_model,
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn types(&self) -> &TypeSpace {
        &self.types
    }

    pub fn utilities(&self) -> &UtilityTable {
        &self.utilities
    }

    pub fn discount(&self) -> &DiscountCurve {
        &self.discount
    }

    pub fn signal_model(&self) -> Option<&SignalChannel> {
        self.signal_model.as_ref()
    }

    /// Number of objects.
    pub fn size(&self) -> usize {
        self.catalog.len()
    }

    /// Same instance under a different partition of the same catalog.
    pub fn with_partition(&self, partition: Partition) -> Result<Instance> {
        Instance::new(
            self.catalog.clone(),
            partition,
            self.types.clone(),
            self.utilities.clone(),
            self.discount.clone(),
            self.signal_model.clone(),
        )
    }

    pub fn with_signal_model(&self, channel: Option<SignalChannel>) -> Result<Instance> {
        Instance::new(
            self.catalog.clone(),
            self.partition.clone(),
            self.types.clone(),
            self.utilities.clone(),
            self.discount.clone(),
            channel,
        )
    }

    pub fn with_discount(&self, discount: DiscountCurve) -> Result<Instance> {
        Instance::new(
            self.catalog.clone(),
            self.partition.clone(),
            self.types.clone(),
            self.utilities.clone(),
            discount,
            self.signal_model.clone(),
        )
    }
}

/// `Σ_n δ_n · score(object at rank n)`.
pub fn allocation_value(allocation: &Allocation, scores: &[f64], discount: &DiscountCurve) -> Result<f64> {
    let ranking = allocation.ranking();
    if scores.len() != ranking.len() || discount.len() != ranking.len() {
        return Err(Error::invalid(format!(
            "allocation ranks {} objects, got {} scores and {} weights",
            ranking.len(),
            scores.len(),
            discount.len()
        )));
    }
    Ok(ranking
        .iter()
        .zip(discount.weights())
        .map(|(&x, &w)| w * scores[x])
        .sum())
}
