//! Execution strategy and enumeration budgets.
//!
//! Every data-parallel loop in the crate goes through [`map_indexed`], which
//! runs on rayon when the `parallel` feature is enabled and the caller asked
//! for [`Exec::Parallel`], and sequentially otherwise. Work is always split
//! into the same fixed blocks and reduced in block order, so results are
//! bit-identical between the two strategies and across thread counts.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Per-call cap on enumerated terms (`depth * width^depth`) plus the
/// execution strategy used for the enumeration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_terms: u64,
    pub exec: Exec,
}

impl Budget {
    pub const DEFAULT_TERMS: u64 = 100_000_000;

    pub fn new(max_terms: u64) -> Self {
        Budget { max_terms, exec: Exec::default() }
    }

    pub fn with_exec(self, exec: Exec) -> Self {
        Budget { exec, ..self }
    }

    /// Check `depth * width^depth` against the cap and return `width^depth`.
    pub fn check(&self, width: usize, depth: usize) -> Result<usize> {
        let mut count: u128 = 1;
        for _ in 0..depth {
            count = count.saturating_mul(width as u128);
            if count > u64::MAX as u128 {
                break;
            }
        }
        let requested = count.saturating_mul(depth.max(1) as u128);
        if requested > self.max_terms as u128 || count > usize::MAX as u128 {
            return Err(Error::BudgetExceeded { requested, cap: self.max_terms });
        }
        Ok(count as usize)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_TERMS)
    }
}

/// Apply `f` to `0..count`, preserving index order in the output.
pub(crate) fn map_indexed<R, F>(exec: Exec, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Number of leading (innermost) letters used to split a depth-`depth`
/// enumeration over `width` letters into blocks.
pub(crate) fn split_depth(width: usize, depth: usize) -> usize {
    let mut p = 0;
    let mut blocks = 1usize;
    while p < depth && blocks < 256 {
        blocks = blocks.saturating_mul(width);
        p += 1;
    }
    p
}
