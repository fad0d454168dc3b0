//! Seeded sampling for experiments.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`, which is
//! platform-independent. Subsets are drawn by a partial Fisher–Yates shuffle
//! over point indices, with the displaced entries kept in a map so large
//! grids need no `q^d`-sized buffer.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type ExperimentRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` distinct indices from `0..n`, uniformly without replacement, in draw
/// order.
pub fn sample_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::Infeasible {
            requested: k,
            available: n,
        });
    }
    let mut swapped: HashMap<usize, usize> = HashMap::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.random_range(i..n);
        let at_j = swapped.get(&j).copied().unwrap_or(j);
        let at_i = swapped.get(&i).copied().unwrap_or(i);
        swapped.insert(j, at_i);
        out.push(at_j);
    }
    Ok(out)
}
