//! Block selection policies.

use alloc::vec::Vec;
use core::fmt;

use crate::rng::{bounded, split_mix64};

/// How the block index `i_k` is chosen at iteration `k`.
///
/// Both modes are deterministic: the random stream is a pure function of
/// `(seed, k)`, so two runs with the same seed touch the same blocks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SelectionPolicy {
    /// `i_k` uniform over `0..N`, reproducible per seed.
    RandomUniform { seed: u64 },
    /// `i_k = order[k mod N]`; `order` must be a permutation of `0..N`.
    Cyclic { order: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionError {
    /// The cyclic order is not a permutation of `0..N`.
    NotAPermutation,
    /// The cyclic order length does not match the block count.
    WrongLength { expected: usize, got: usize },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::NotAPermutation => write!(f, "cyclic order is not a permutation"),
            SelectionError::WrongLength { expected, got } => {
                write!(f, "cyclic order has length {got}, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SelectionError {}

impl SelectionPolicy {
    /// Cyclic selection in ascending block order.
    pub fn cyclic_ascending(num_blocks: usize) -> Self {
        SelectionPolicy::Cyclic {
            order: (0..num_blocks).collect(),
        }
    }

    /// Check the policy against a partition with `num_blocks` blocks.
    pub fn validate(&self, num_blocks: usize) -> Result<(), SelectionError> {
        match self {
            SelectionPolicy::RandomUniform { .. } => Ok(()),
            SelectionPolicy::Cyclic { order } => {
                if order.len() != num_blocks {
                    return Err(SelectionError::WrongLength {
                        expected: num_blocks,
                        got: order.len(),
                    });
                }
                let mut seen = alloc::vec![false; num_blocks];
                for &i in order {
                    if i >= num_blocks || seen[i] {
                        return Err(SelectionError::NotAPermutation);
                    }
                    seen[i] = true;
                }
                Ok(())
            }
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, SelectionPolicy::RandomUniform { .. })
    }
}

/// Block id for iteration `k` in `0..num_blocks`.
pub fn next_block(policy: &SelectionPolicy, num_blocks: usize, k: u64) -> usize {
    match policy {
        SelectionPolicy::RandomUniform { seed } => bounded(split_mix64(*seed, k), num_blocks),
        SelectionPolicy::Cyclic { order } => order[(k % order.len() as u64) as usize],
    }
}
