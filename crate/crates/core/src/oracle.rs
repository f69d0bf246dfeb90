//! Exhaustive ground truth for small instances.

use thiserror::Error;

use crate::problem::Problem;
use crate::solution::feasible_subset;

pub const DEFAULT_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("instance has {n} actions; exhaustive search is capped at {cap}")]
pub struct TooLarge {
    pub n: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub value: usize,
    /// Lexicographically smallest optimal acceptance vector (`false < true`,
    /// action 0 most significant).
    pub accepted: Vec<bool>,
}

/// Enumerates all `2^n` acceptance sets. Refuses instances above `cap`.
pub fn brute_force_capped(problem: &Problem, cap: usize) -> Result<OracleResult, TooLarge> {
    let n = problem.len();
    if n > cap || n >= usize::BITS as usize {
        return Err(TooLarge { n, cap });
    }
    let decode =
        |mask: usize| -> Vec<bool> { (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect() };
    // ascending masks visit acceptance vectors in lexicographic order, so the
    // first mask reaching a cardinality is the smallest witness for it
    let mut best = (0usize, 0usize);
    for mask in 1usize..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best.0 {
            continue;
        }
        if feasible_subset(problem, &decode(mask)) {
            best = (size, mask);
        }
    }
    Ok(OracleResult {
        value: best.0,
        accepted: decode(best.1),
    })
}

pub fn brute_force(problem: &Problem) -> Result<OracleResult, TooLarge> {
    brute_force_capped(problem, DEFAULT_CAP)
}
