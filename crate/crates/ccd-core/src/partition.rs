//! Block decomposition of the coordinates `0..n`.
//!
//! A block plays the role of a column selection `U_i` of a permuted identity:
//! `U_i^T v` is a gather of the block's coordinates and `x + U_i d` is a
//! scatter-add, so the matrices are never materialized.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Absolute floor for the margins `eta_i`.
pub const ETA_FLOOR: f64 = 1e-8;

/// Default margin policy: `eta_i = max(1e-8, 1e-3 * L_i)`.
///
/// A relative margin keeps the prox stepsize within a factor of the Lipschitz
/// constant; the absolute floor keeps `eta_i > 0` on blocks with `L_i = 0`.
pub fn default_margin(lipschitz: f64) -> f64 {
    let rel = 1e-3 * lipschitz;
    if rel > ETA_FLOOR {
        rel
    } else {
        ETA_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BlockIndices {
    /// Contiguous coordinate range, stored as (start, end).
    Range(usize, usize),
    /// Arbitrary index set.
    Set(Vec<usize>),
}

impl BlockIndices {
    fn len(&self) -> usize {
        match self {
            BlockIndices::Range(a, b) => b - a,
            BlockIndices::Set(s) => s.len(),
        }
    }
}

/// A borrowed view of one block: its id and its coordinate set.
#[derive(Debug, Clone, Copy)]
pub struct BlockRef<'a> {
    pub id: usize,
    indices: &'a BlockIndices,
}

impl<'a> BlockRef<'a> {
    /// Number of coordinates in the block.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterate over the global coordinate indices of the block.
    pub fn iter(&self) -> BlockIter<'a> {
        match self.indices {
            BlockIndices::Range(a, b) => BlockIter::Range(*a, *b),
            BlockIndices::Set(s) => BlockIter::Set(s.iter()),
        }
    }

    /// `out = U_i^T v` (gather).
    pub fn gather(&self, v: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.indices {
            BlockIndices::Range(a, b) => out.extend_from_slice(&v[*a..*b]),
            BlockIndices::Set(s) => out.extend(s.iter().map(|&j| v[j])),
        }
    }

    /// `x += U_i d` (scatter-add).
    pub fn scatter_add(&self, x: &mut [f64], d: &[f64]) {
        debug_assert_eq!(d.len(), self.len());
        for (slot, dj) in self.iter().zip(d) {
            x[slot] += dj;
        }
    }

    /// Squared Euclidean norm of the block slice of `v`.
    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in self.iter() {
            s += v[j] * v[j];
        }
        s
    }
}

pub enum BlockIter<'a> {
    Range(usize, usize),
    Set(core::slice::Iter<'a, usize>),
}

impl<'a> Iterator for BlockIter<'a> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            BlockIter::Range(a, b) => {
                if a < b {
                    let j = *a;
                    *a += 1;
                    Some(j)
                } else {
                    None
                }
            }
            BlockIter::Set(it) => it.next().copied(),
        }
    }
}

/// Decomposition of `{0..n}` into disjoint blocks with per-block Lipschitz
/// constants `L_i` and positive margins `eta_i`.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    n: usize,
    blocks: Vec<BlockIndices>,
    lipschitz: Vec<f64>,
    margins: Vec<f64>,
}

/// Construction-time validation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionError {
    /// An index occurs in two blocks or twice in one block.
    DuplicateIndex(usize),
    /// An index is outside `0..n`.
    IndexOutOfRange(usize),
    /// The union of the blocks misses some coordinates.
    IncompleteCover { covered: usize, n: usize },
    /// `L_i` must be finite and nonnegative.
    InvalidLipschitz { block: usize, value: f64 },
    /// `eta_i` must be finite and strictly positive.
    InvalidMargin { block: usize, value: f64 },
    /// A block is empty.
    EmptyBlock(usize),
    /// Constant-vector length does not match the block count.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for PartitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionError::DuplicateIndex(j) => write!(f, "coordinate {j} appears twice"),
            PartitionError::IndexOutOfRange(j) => write!(f, "coordinate {j} out of range"),
            PartitionError::IncompleteCover { covered, n } => {
                write!(f, "blocks cover {covered} of {n} coordinates")
            }
            PartitionError::InvalidLipschitz { block, value } => {
                write!(f, "block {block}: Lipschitz constant {value} invalid")
            }
            PartitionError::InvalidMargin { block, value } => {
                write!(f, "block {block}: margin {value} invalid")
            }
            PartitionError::EmptyBlock(i) => write!(f, "block {i} is empty"),
            PartitionError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} per-block constants, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PartitionError {}

impl BlockPartition {
    /// One block per coordinate (`N = n`), all constants from `lipschitz`.
    pub fn unit_blocks(lipschitz: Vec<f64>) -> Result<Self, PartitionError> {
        let n = lipschitz.len();
        let blocks = (0..n).map(|j| BlockIndices::Range(j, j + 1)).collect();
        Self::build(n, blocks, lipschitz)
    }

    /// A single block containing all coordinates (`N = 1`).
    pub fn single_block(n: usize, lipschitz: f64) -> Result<Self, PartitionError> {
        Self::build(n, vec![BlockIndices::Range(0, n)], vec![lipschitz])
    }

    /// Contiguous blocks of the given sizes.
    pub fn contiguous(sizes: &[usize], lipschitz: Vec<f64>) -> Result<Self, PartitionError> {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            blocks.push(BlockIndices::Range(start, start + s));
            start += s;
        }
        Self::build(start, blocks, lipschitz)
    }

    /// Arbitrary index sets covering `0..n`.
    pub fn from_index_sets(
        n: usize,
        sets: Vec<Vec<usize>>,
        lipschitz: Vec<f64>,
    ) -> Result<Self, PartitionError> {
        let blocks = sets.into_iter().map(BlockIndices::Set).collect();
        Self::build(n, blocks, lipschitz)
    }

    fn build(
        n: usize,
        blocks: Vec<BlockIndices>,
        lipschitz: Vec<f64>,
    ) -> Result<Self, PartitionError> {
        if lipschitz.len() != blocks.len() {
            return Err(PartitionError::LengthMismatch {
                expected: blocks.len(),
                got: lipschitz.len(),
            });
        }
        let mut seen = vec![false; n];
        let mut covered = 0usize;
        for (i, b) in blocks.iter().enumerate() {
            if b.len() == 0 {
                return Err(PartitionError::EmptyBlock(i));
            }
            let view = BlockRef { id: i, indices: b };
            for j in view.iter() {
                if j >= n {
                    return Err(PartitionError::IndexOutOfRange(j));
                }
                if seen[j] {
                    return Err(PartitionError::DuplicateIndex(j));
                }
                seen[j] = true;
                covered += 1;
            }
        }
        if covered != n {
            return Err(PartitionError::IncompleteCover { covered, n });
        }
        for (i, &l) in lipschitz.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(PartitionError::InvalidLipschitz { block: i, value: l });
            }
        }
        let margins = lipschitz.iter().map(|&l| default_margin(l)).collect();
        Ok(BlockPartition {
            n,
            blocks,
            lipschitz,
            margins,
        })
    }

    /// Replace the default margins.
    pub fn with_margins(mut self, margins: Vec<f64>) -> Result<Self, PartitionError> {
        if margins.len() != self.blocks.len() {
            return Err(PartitionError::LengthMismatch {
                expected: self.blocks.len(),
                got: margins.len(),
            });
        }
        for (i, &e) in margins.iter().enumerate() {
            if !(e.is_finite() && e > 0.0) {
                return Err(PartitionError::InvalidMargin { block: i, value: e });
            }
        }
        self.margins = margins;
        Ok(self)
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of blocks `N`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> BlockRef<'_> {
        BlockRef {
            id: i,
            indices: &self.blocks[i],
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockRef<'_>> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(id, indices)| BlockRef { id, indices })
    }

    pub fn lipschitz(&self, i: usize) -> f64 {
        self.lipschitz[i]
    }

    pub fn margin(&self, i: usize) -> f64 {
        self.margins[i]
    }

    /// `eta_min = min_i eta_i`.
    pub fn eta_min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &e in &self.margins {
            if e < m {
                m = e;
            }
        }
        m
    }
}
