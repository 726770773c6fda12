//! Catalogs, block partitions and the allocations they admit.
//!
//! An allocation ranks every object by choosing an order for the partition
//! blocks. Objects inside a block keep their internal order and occupy
//! consecutive ranks.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Ordered universe of object identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut errs = Vec::new();
        if ids.is_empty() {
            errs.push("catalog must contain at least one object".to_string());
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                errs.push(format!("duplicate object id `{id}`"));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Catalog { ids, index })
    }

    /// Catalog `o0, o1, ..., o{m-1}`.
    pub fn numbered(m: usize) -> Result<Self> {
        Catalog::new((0..m).map(|i| format!("o{i}")).collect())
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

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// Ordered blocks of catalog indices covering `0..M` exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    size: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let mut errs = Vec::new();
        if blocks.is_empty() {
            errs.push("partition must contain at least one block".to_string());
        }
        let mut seen = vec![false; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                errs.push(format!("block {b} is empty"));
            }
            for &x in block {
                if x >= m {
                    errs.push(format!("block {b} references index {x} outside catalog of size {m}"));
                } else if seen[x] {
                    errs.push(format!("index {x} appears more than once"));
                } else {
                    seen[x] = true;
                }
            }
        }
        for (x, s) in seen.iter().enumerate() {
            if !s {
                errs.push(format!("index {x} is not covered by any block"));
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Partition { blocks, size: m })
    }

    /// Every object in its own block; all `M!` rankings are feasible.
    pub fn singletons(m: usize) -> Self {
        Partition {
            blocks: (0..m).map(|i| vec![i]).collect(),
            size: m,
        }
    }

    /// One block in catalog order; only the identity ranking is feasible.
    pub fn single_block(m: usize) -> Self {
        Partition {
            blocks: vec![(0..m).collect()],
            size: m,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.blocks[k]
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of objects covered.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Splits blocks at the given cut points.
    pub fn refine(&self, split: &SplitSpec) -> Result<Partition> {
        let mut cuts: Vec<Vec<usize>> = vec![Vec::new(); self.blocks.len()];
        let mut errs = Vec::new();
        for &(b, off) in &split.cuts {
            match self.blocks.get(b) {
                None => errs.push(format!("split references unknown block {b}")),
                Some(block) if off == 0 || off >= block.len() => errs.push(format!(
                    "split offset {off} in block {b} must lie in 1..{}",
                    block.len()
                )),
                Some(_) => cuts[b].push(off),
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let mut blocks = Vec::new();
        for (block, mut offs) in self.blocks.iter().zip(cuts) {
            offs.sort_unstable();
            offs.dedup();
            let mut start = 0;
            for off in offs.into_iter().chain(std::iter::once(block.len())) {
                blocks.push(block[start..off].to_vec());
                start = off;
            }
        }
        Ok(Partition {
            blocks,
            size: self.size,
        })
    }

    /// Splits every block into singletons.
    pub fn singletonize(&self) -> Partition {
        Partition {
            blocks: self.blocks.iter().flatten().map(|&x| vec![x]).collect(),
            size: self.size,
        }
    }

    /// Number of feasible allocations, `K!`, saturating at `u128::MAX`.
    pub fn allocation_count(&self) -> u128 {
        (1..=self.blocks.len() as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
    }
}

/// Cut points `(block, offset)`: the block is split before its element at
/// `offset`. Cuts are contiguous by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitSpec {
    pub cuts: Vec<(usize, usize)>,
}

impl SplitSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn at(cuts: impl IntoIterator<Item = (usize, usize)>) -> Self {
        SplitSpec {
            cuts: cuts.into_iter().collect(),
        }
    }
}

/// How a candidate partition relates to a coarser one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// Same blocks, up to block order.
    Equal,
    /// Every fine block is a contiguous run of one coarse block, and at least
    /// one coarse block was split.
    Strict,
    /// Not a refinement: some fine block straddles coarse blocks, is not
    /// contiguous, or reorders objects.
    Not,
}

impl Refinement {
    /// True in the weak sense (equal or strict).
    pub fn holds(self) -> bool {
        !matches!(self, Refinement::Not)
    }
}

/// Checks whether `fine` refines `coarse` in the sense that every allocation
/// feasible under `coarse` is also feasible under `fine`.
pub fn is_refinement(coarse: &Partition, fine: &Partition) -> Refinement {
    if coarse.size != fine.size {
        return Refinement::Not;
    }
    // (block, position inside block) of every object under the coarse partition.
    let mut home = vec![(0usize, 0usize); coarse.size];
    for (b, block) in coarse.blocks.iter().enumerate() {
        for (j, &x) in block.iter().enumerate() {
            home[x] = (b, j);
        }
    }
    for block in &fine.blocks {
        let (b0, j0) = home[block[0]];
        for (step, &x) in block.iter().enumerate() {
            if home[x] != (b0, j0 + step) {
                return Refinement::Not;
            }
        }
    }
    if fine.blocks.len() == coarse.blocks.len() {
        Refinement::Equal
    } else {
        Refinement::Strict
    }
}

/// A feasible ranking: an order over the partition blocks, expanded to
/// absolute 0-based ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    block_order: Vec<usize>,
    ranking: Vec<usize>,
    position_of: Vec<usize>,
}

impl Allocation {
    pub fn new(partition: &Partition, block_order: Vec<usize>) -> Result<Self> {
        let k = partition.block_count();
        let mut seen = vec![false; k];
        if block_order.len() != k {
            return Err(Error::invalid(format!(
                "block order has length {}, expected {k}",
                block_order.len()
            )));
        }
        for &b in &block_order {
            if b >= k || seen[b] {
                return Err(Error::invalid(format!(
                    "block order {block_order:?} is not a permutation of 0..{k}"
                )));
            }
            seen[b] = true;
        }
        let mut ranking = Vec::with_capacity(partition.size());
        for &b in &block_order {
            ranking.extend_from_slice(partition.block(b));
        }
        let mut position_of = vec![0; ranking.len()];
        for (n, &x) in ranking.iter().enumerate() {
            position_of[x] = n;
        }
        Ok(Allocation {
            block_order,
            ranking,
            position_of,
        })
    }

    pub fn identity(partition: &Partition) -> Self {
        Allocation::new(partition, (0..partition.block_count()).collect()).expect("identity order is a permutation")
    }

    pub fn block_order(&self) -> &[usize] {
        &self.block_order
    }

    /// Object at each rank.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// Rank of object `x`.
    pub fn position_of(&self, x: usize) -> usize {
        self.position_of[x]
    }
}
