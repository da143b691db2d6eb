//! The three randomization primitives behind the partial-information
//! learners: uniform without-replacement subsets, uniform sets of ordered
//! index pairs, and weighted index draws.
//!
//! Every sampler consumes a fixed number of RNG draws for a given (n, size),
//! so a seed pins down an entire run.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::WeightVector;
use crate::rng::RngStream;

/// A set of distinct indices in [0, d), stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    indices: Vec<usize>,
}

impl IndexSubset {
    /// Build from a list of indices; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "subset indices must be distinct".into(),
            ));
        }
        Ok(IndexSubset { indices })
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// A set of distinct ordered pairs (i, j) in [0, d) x [0, d).
/// Diagonal pairs (i, i) are permitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    /// Build from a pair list; duplicates (as ordered pairs) are rejected.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "pairs must be distinct as ordered pairs".into(),
            ));
        }
        Ok(PairSet { pairs })
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Uniform subset of [0, n) with `size` distinct elements.
///
/// Sparse Fisher-Yates partial shuffle: uniform by construction, O(size)
/// memory, and exactly `size` RNG draws.
pub fn sample_subset(n: usize, size: usize, rng: &mut RngStream) -> Result<IndexSubset> {
    if size > n {
        return Err(Error::InvalidSize { size, n });
    }
    let mut displaced: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        let j = i + rng.uniform_index(n - i);
        let vj = *displaced.get(&j).unwrap_or(&j);
        let vi = *displaced.get(&i).unwrap_or(&i);
        out.push(vj);
        displaced.insert(j, vi);
    }
    out.sort_unstable();
    Ok(IndexSubset { indices: out })
}

/// Uniform set of `size` distinct ordered pairs from [0, d) x [0, d).
pub fn sample_pair_set(d: usize, size: usize, rng: &mut RngStream) -> Result<PairSet> {
    let n = d * d;
    if size > n {
        return Err(Error::InvalidSize { size, n });
    }
    let flat = sample_subset(n, size, rng)?;
    let pairs = flat.indices().iter().map(|&p| (p / d, p % d)).collect();
    Ok(PairSet { pairs })
}

/// Draw index i with probability |w_i| / ||w||_1.
///
/// Inverse-CDF over the prefix sums of |w_i|; a draw landing exactly on a
/// boundary resolves to the lower index, and zero-weight components are
/// never selected.
pub fn sample_weighted_index(w: &WeightVector, rng: &mut RngStream) -> Result<usize> {
    let total = w.l1_norm();
    if total <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let t = rng.next_f64() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &v) in w.as_slice().iter().enumerate() {
        let a = v.abs();
        if a == 0.0 {
            continue;
        }
        acc += a;
        last_positive = Some(i);
        if t <= acc {
            return Ok(i);
        }
    }
    // Rounding in the prefix sum can leave t slightly above the final
    // accumulator; the draw belongs to the last positive-weight index.
    Ok(last_positive.expect("positive total implies a positive component"))
}
