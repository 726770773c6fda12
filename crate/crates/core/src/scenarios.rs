//! Seeded instance generators for the canonical preference regimes.
//!
//! All randomness comes from [`GENERATOR`] seeded with the spec's seed, so a
//! spec always expands to the same instance.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discount::{make_discount, DiscountSpec};
use crate::error::{Error, Result};
use crate::inference::SignalChannel;
use crate::instance::{Instance, Matrix, TypeSpace, UtilityTable};
use crate::partition::{Catalog, Partition};

/// Name and version of the pseudo-random generator behind every scenario.
pub const GENERATOR: &str = "chacha8-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Aligned,
    AntiAligned,
    Orthogonal,
    Random,
    Preset,
}

/// Illustrative platform categories. They fix dimensions and discount shape only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Search,
    Content,
    Social,
    Matching,
    Marketplace,
}

impl Preset {
    pub fn dims(self) -> Dims {
        match self {
            Preset::Search => Dims::new(10, 10, 4, 4),
            Preset::Content => Dims::new(12, 6, 4, 4),
            Preset::Social => Dims::new(20, 20, 6, 6),
            Preset::Matching => Dims::new(8, 8, 3, 3),
            Preset::Marketplace => Dims::new(16, 8, 5, 5),
        }
    }

    pub fn discount(self) -> DiscountSpec {
        match self {
            // Ranked result list read top-down.
            Preset::Search => DiscountSpec::Dcg {},
            // Homepage with a handful of featured slots.
            Preset::Content => DiscountSpec::Cutoff { n: 4 },
            // Scrolling feed.
            Preset::Social => DiscountSpec::Geometric { beta: 0.85 },
            // A short list of suggested matches.
            Preset::Matching => DiscountSpec::Cutoff { n: 3 },
            Preset::Marketplace => DiscountSpec::Dcg {},
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::invalid(format!("unknown preset `{s}`")))
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .map_err(|_| Error::invalid(format!("unknown scenario kind `{s}`")))
    }
}

/// Objects, blocks, types, signals. Zero signals means no signal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub objects: usize,
    pub blocks: usize,
    pub types: usize,
    pub signals: usize,
}

impl Dims {
    pub fn new(objects: usize, blocks: usize, types: usize, signals: usize) -> Self {
        Dims {
            objects,
            blocks,
            types,
            signals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Overrides the preset (or default DCG) discount.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<DiscountSpec>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, dims: Dims, seed: u64) -> Self {
        ScenarioSpec {
            kind,
            dims: Some(dims),
            seed: Some(seed),
            preset: None,
            discount: None,
        }
    }

    pub fn preset(preset: Preset, seed: u64) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Preset,
            dims: None,
            seed: Some(seed),
            preset: Some(preset),
            discount: None,
        }
    }

    pub fn with_discount(mut self, discount: DiscountSpec) -> Self {
        self.discount = Some(discount);
        self
    }

    fn resolved_dims(&self) -> Result<Dims> {
        let d = self
            .dims
            .or_else(|| self.preset.map(Preset::dims))
            .ok_or_else(|| Error::invalid("scenario needs dims or a preset"))?;
        let mut errs = Vec::new();
        if d.objects == 0 || d.blocks == 0 || d.types == 0 {
            errs.push("objects, blocks and types must be positive".to_string());
        }
        if d.blocks > d.objects {
            errs.push(format!("{} blocks cannot partition {} objects", d.blocks, d.objects));
        }
        if errs.is_empty() {
            Ok(d)
        } else {
            Err(Error::Validation(errs))
        }
    }

    fn resolved_discount(&self) -> DiscountSpec {
        self.discount
            .clone()
            .or_else(|| self.preset.map(Preset::discount))
            .unwrap_or(DiscountSpec::Dcg {})
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved_dims()?;
        if self.seed.is_none() && matches!(self.kind, ScenarioKind::Random | ScenarioKind::Preset) {
            return Err(Error::invalid("random scenarios require a seed"));
        }
        if self.kind == ScenarioKind::Preset && self.preset.is_none() {
            return Err(Error::invalid("preset scenarios require a preset name"));
        }
        Ok(())
    }
}

/// Expands a spec into an instance.
pub fn generate(spec: &ScenarioSpec) -> Result<Instance> {
    match spec.kind {
        ScenarioKind::Aligned => gen_aligned(spec),
        ScenarioKind::AntiAligned => gen_antialigned(spec),
        ScenarioKind::Orthogonal => gen_orthogonal(spec),
        ScenarioKind::Random | ScenarioKind::Preset => gen_random(spec),
    }
}

/// Advocate utilities identical to the agent's.
pub fn gen_aligned(spec: &ScenarioSpec) -> Result<Instance> {
    let mut b = Builder::new(spec)?;
    let agent = b.uniform_matrix();
    b.finish(agent.clone(), agent)
}

/// Advocate utilities `c − u` with `c` the largest agent utility.
pub fn gen_antialigned(spec: &ScenarioSpec) -> Result<Instance> {
    let mut b = Builder::new(spec)?;
    let agent = b.uniform_matrix();
    let c = agent.iter_rows().flatten().copied().fold(0.0, f64::max);
    let mut advocate = agent.clone();
    for r in 0..advocate.rows() {
        for x in advocate.row_mut(r) {
            *x = c - *x;
        }
    }
    b.finish(agent, advocate)
}

/// Agent indifferent across objects (a per-type constant); advocate random.
pub fn gen_orthogonal(spec: &ScenarioSpec) -> Result<Instance> {
    let mut b = Builder::new(spec)?;
    let mut agent = Matrix::filled(b.dims.types, b.dims.objects, 0.0);
    for r in 0..agent.rows() {
        let level = b.rng.gen_range(0.5..1.0);
        agent.row_mut(r).fill(level);
    }
    let advocate = b.uniform_matrix();
    b.finish(agent, advocate)
}

/// Independent uniform utilities for both parties.
pub fn gen_random(spec: &ScenarioSpec) -> Result<Instance> {
    if spec.seed.is_none() {
        return Err(Error::invalid("random scenarios require a seed"));
    }
    let mut b = Builder::new(spec)?;
    let agent = b.uniform_matrix();
    let advocate = b.uniform_matrix();
    b.finish(agent, advocate)
}

/// Draw order is fixed: partition, prior, channel, then utilities.
struct Builder {
    dims: Dims,
    rng: ChaCha8Rng,
    discount: DiscountSpec,
    partition: Partition,
    prior: Vec<f64>,
    channel: Option<SignalChannel>,
}

impl Builder {
    fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let dims = spec.resolved_dims()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(0));
        let partition = random_partition(&mut rng, dims.objects, dims.blocks)?;
        let prior = random_simplex(&mut rng, dims.types);
        let channel = if dims.signals > 0 {
            let rows = (0..dims.types)
                .map(|_| random_simplex(&mut rng, dims.signals))
                .collect();
            Some(SignalChannel::new(
                (0..dims.signals).map(|i| format!("s{i}")).collect(),
                Matrix::from_rows(rows)?,
            )?)
        } else {
            None
        };
        Ok(Builder {
            dims,
            rng,
            discount: spec.resolved_discount(),
            partition,
            prior,
            channel,
        })
    }

    fn uniform_matrix(&mut self) -> Matrix {
        let rows = (0..self.dims.types)
            .map(|_| (0..self.dims.objects).map(|_| self.rng.gen::<f64>()).collect())
            .collect();
        Matrix::from_rows(rows).expect("rows share a length")
    }

    fn finish(self, agent: Matrix, advocate: Matrix) -> Result<Instance> {
        let m = self.dims.objects;
        let types = TypeSpace::new((0..self.dims.types).map(|i| format!("t{i}")).collect(), self.prior)?;
        Instance::new(
            Catalog::numbered(m)?,
            self.partition,
            types,
            UtilityTable::new(agent, advocate)?,
            make_discount(&self.discount, m)?,
            self.channel,
        )
    }
}

/// Contiguous chunks of a seeded permutation, with `k − 1` random cut points.
fn random_partition(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Result<Partition> {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let mut cuts: Vec<usize> = if k > 1 {
        sample(rng, m - 1, k - 1).into_iter().map(|c| c + 1).collect()
    } else {
        Vec::new()
    };
    cuts.sort_unstable();
    cuts.push(m);
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts {
        blocks.push(perm[start..c].to_vec());
        start = c;
    }
    Partition::new(blocks, m)
}

/// Normalized positive draws.
fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ScenarioKind, m: usize, k: usize) -> ScenarioSpec {
        ScenarioSpec::new(kind, Dims::new(m, k, 3, 2), 42)
    }

    #[test]
    fn deterministic_given_seed() {
        for kind in [
            ScenarioKind::Aligned,
            ScenarioKind::AntiAligned,
            ScenarioKind::Orthogonal,
            ScenarioKind::Random,
        ] {
            let s = spec(kind, 6, 3);
            assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        }
        let a = generate(&spec(ScenarioKind::Random, 6, 3)).unwrap();
        let mut other = spec(ScenarioKind::Random, 6, 3);
        other.seed = Some(43);
        assert_ne!(a, generate(&other).unwrap());
    }

    #[test]
    fn block_sizes_cover_catalog() {
        let inst = generate(&spec(ScenarioKind::Random, 6, 3)).unwrap();
        assert_eq!(inst.partition().block_count(), 3);
        assert_eq!(inst.partition().blocks().iter().map(Vec::len).sum::<usize>(), 6);
    }

    #[test]
    fn aligned_copies_agent() {
        let inst = generate(&spec(ScenarioKind::Aligned, 5, 5)).unwrap();
        assert_eq!(inst.utilities().agent(), inst.utilities().advocate());
    }

    #[test]
    fn antialigned_is_affine_opposite() {
        let inst = generate(&spec(ScenarioKind::AntiAligned, 5, 2)).unwrap();
        let (u, v) = (inst.utilities().agent(), inst.utilities().advocate());
        let c = u.iter_rows().flatten().copied().fold(0.0, f64::max);
        for r in 0..u.rows() {
            for (a, b) in u.row(r).iter().zip(v.row(r)) {
                assert!(*b >= 0.0);
                assert_eq!(*b, c - a);
            }
        }
    }

    #[test]
    fn orthogonal_agent_is_flat() {
        let inst = generate(&spec(ScenarioKind::Orthogonal, 5, 5)).unwrap();
        for row in inst.utilities().agent().iter_rows() {
            assert!(row.iter().all(|x| *x == row[0]));
        }
    }

    #[test]
    fn presets_and_validation() {
        let inst = generate(&ScenarioSpec::preset(Preset::Content, 1)).unwrap();
        assert_eq!(inst.size(), 12);
        assert_eq!(inst.discount().spec(), &DiscountSpec::Cutoff { n: 4 });
        assert!("marketplace".parse::<Preset>().is_ok());
        assert!("anti-aligned".parse::<ScenarioKind>().is_ok());
        let mut s = spec(ScenarioKind::Random, 3, 4);
        assert!(generate(&s).is_err());
        s.dims = Some(Dims::new(3, 3, 1, 0));
        s.seed = None;
        assert!(generate(&s).is_err());
        let single = generate(&ScenarioSpec::new(ScenarioKind::Aligned, Dims::new(1, 1, 1, 0), 0)).unwrap();
        assert_eq!(single.size(), 1);
        assert!(single.signal_model().is_none());
    }
}
