//! Unbiased estimators built from revealed attributes: the sparse instance
//! estimate, the Gram/instance pair used by the loss-estimating learner, and
//! the gradient estimate used by the stochastic learner.
//!
//! Each estimator comes in two layers: a `*_from_*` form that takes the
//! random choices as explicit inputs (deterministic replay, exhaustive
//! enumeration in tests) and a sampling form that draws them from an
//! [`RngStream`].

use crate::error::{Error, Result};
use crate::model::{AttributeOracle, WeightVector};
use crate::rng::RngStream;
use crate::sampling::{
    sample_pair_set, sample_subset, sample_weighted_index, IndexSubset, PairSet,
};

/// Symmetric d x d accumulator for the estimated correlation matrix.
///
/// Symmetry is exact by construction: every update touches (i, j) and (j, i)
/// with the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct GramEstimate {
    d: usize,
    a: Vec<f64>,
}

impl GramEstimate {
    pub fn zeros(d: usize) -> Self {
        GramEstimate {
            d,
            a: vec![0.0; d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.d + j]
    }

    /// Add `value` to both `A[i][j]` and `A[j][i]`; a diagonal target therefore
    /// receives 2 * value.
    pub fn add_symmetric(&mut self, i: usize, j: usize, value: f64) {
        self.a[i * self.d + j] += value;
        self.a[j * self.d + i] += value;
    }

    /// self += alpha * other
    pub fn scaled_add(&mut self, alpha: f64, other: &GramEstimate) {
        debug_assert_eq!(self.d, other.d);
        for (s, o) in self.a.iter_mut().zip(&other.a) {
            *s += alpha * o;
        }
    }

    /// Quadratic form w^T A w.
    pub fn quad_form(&self, w: &WeightVector) -> Result<f64> {
        if w.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: w.dim(),
            });
        }
        let ws = w.as_slice();
        let mut total = 0.0;
        for i in 0..self.d {
            let wi = ws[i];
            if wi == 0.0 {
                continue;
            }
            let row = &self.a[i * self.d..(i + 1) * self.d];
            let mut inner = 0.0;
            for (a, wj) in row.iter().zip(ws) {
                inner += a * wj;
            }
            total += wi * inner;
        }
        Ok(total)
    }

    /// y = A w
    pub fn mul_vec(&self, w: &WeightVector) -> Result<WeightVector> {
        if w.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: w.dim(),
            });
        }
        let ws = w.as_slice();
        let out: Vec<f64> = self
            .a
            .chunks_exact(self.d)
            .map(|row| row.iter().zip(ws).map(|(a, w)| a * w).sum())
            .collect();
        Ok(WeightVector::new(out).expect("finite by construction"))
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                if self.a[i * self.d + j] != self.a[j * self.d + i] {
                    return false;
                }
            }
        }
        true
    }
}

/// Output of the gradient estimator: the sparse gradient itself and the
/// scalar prediction estimate it was built from.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub g: WeightVector,
    pub y_hat: f64,
}

/// Sparse unbiased estimate of x from an explicit index subset:
/// v_r = (d/b) x_r on the subset, 0 elsewhere. Consumes b budget units.
pub fn instance_from_subset(
    oracle: &mut AttributeOracle,
    subset: &IndexSubset,
) -> Result<WeightVector> {
    let d = oracle.dim();
    let b = subset.size();
    let mut v = WeightVector::zeros(d);
    let scale = d as f64 / b as f64;
    for &r in subset.indices() {
        let x = oracle.reveal(r)?;
        v.as_mut_slice()[r] = scale * x;
    }
    Ok(v)
}

/// Sparse unbiased estimate of x using b uniformly drawn distinct indices.
pub fn estimate_instance(
    oracle: &mut AttributeOracle,
    b: usize,
    rng: &mut RngStream,
) -> Result<WeightVector> {
    let d = oracle.dim();
    if b == 0 || b > d {
        return Err(Error::InvalidSize { size: b, n: d });
    }
    let subset = sample_subset(d, b, rng)?;
    instance_from_subset(oracle, &subset)
}

/// Shared kernel for the pair-based estimators: reveals both ends of every
/// pair (2 budget units each, diagonal included) and returns the Gram
/// contributions together with the instance estimate.
///
/// One Gram contribution: the cell (i, j) and the value added to it and to
/// its mirror (j, i).
pub(crate) type GramContribution = (usize, usize, f64);

/// With s = |pairs| and k = 2s, each pair (i, j) contributes
/// (d^2/k) x_i x_j to `A[i][j]` *and* `A[j][i]`, and adds (d/k) x_i to v_i and
/// (d/k) x_j to v_j.
pub(crate) fn pair_contributions(
    oracle: &mut AttributeOracle,
    pairs: &PairSet,
) -> Result<(Vec<GramContribution>, WeightVector)> {
    let d = oracle.dim();
    let k = 2 * pairs.size();
    let v_scale = d as f64 / k as f64;
    let a_scale = (d * d) as f64 / k as f64;
    let mut v = WeightVector::zeros(d);
    let mut contribs = Vec::with_capacity(pairs.size());
    for &(i, j) in pairs.pairs() {
        let xi = oracle.reveal(i)?;
        let xj = oracle.reveal(j)?;
        v.as_mut_slice()[i] += v_scale * xi;
        v.as_mut_slice()[j] += v_scale * xj;
        contribs.push((i, j, a_scale * xi * xj));
    }
    Ok((contribs, v))
}

/// Gram/instance estimate from an explicit pair set. Consumes 2|pairs|
/// budget units.
pub fn gram_and_instance_from_pairs(
    oracle: &mut AttributeOracle,
    pairs: &PairSet,
) -> Result<(GramEstimate, WeightVector)> {
    let d = oracle.dim();
    let (contribs, v) = pair_contributions(oracle, pairs)?;
    let mut a = GramEstimate::zeros(d);
    for (i, j, c) in contribs {
        a.add_symmetric(i, j, c);
    }
    Ok((a, v))
}

/// Gram/instance estimate from a uniform pair set of size k/2.
/// Consumes exactly k budget units.
pub fn estimate_gram_and_instance(
    oracle: &mut AttributeOracle,
    k: usize,
    rng: &mut RngStream,
) -> Result<(GramEstimate, WeightVector)> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::OddBudget(k));
    }
    let d = oracle.dim();
    let pairs = sample_pair_set(d, k / 2, rng)?;
    gram_and_instance_from_pairs(oracle, &pairs)
}

/// Gradient estimate from explicit random choices.
///
/// `y_hat_draws` are the weighted-sample indices (with replacement); each
/// contributes sgn(w_i) ||w||_1 x_i / n_draws to the prediction estimate and
/// consumes one budget unit. An empty draw list means y_hat = 0 and spends
/// nothing, which is the zero-weight case. `v_subset` feeds the instance
/// estimator. The result is g = 2 (y_hat - y) v.
pub fn gradient_from_parts(
    oracle: &mut AttributeOracle,
    w: &WeightVector,
    v_subset: &IndexSubset,
    y_hat_draws: &[usize],
) -> Result<GradientEstimate> {
    if w.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: w.dim(),
        });
    }
    let v = instance_from_subset(oracle, v_subset)?;
    let mut y_hat = 0.0;
    if !y_hat_draws.is_empty() {
        let norm = w.l1_norm();
        let per_draw = 1.0 / y_hat_draws.len() as f64;
        for &i in y_hat_draws {
            let x = oracle.reveal(i)?;
            y_hat += per_draw * w.as_slice()[i].signum() * norm * x;
        }
    }
    let mut g = v;
    g.scale(2.0 * (y_hat - oracle.target()));
    Ok(GradientEstimate { g, y_hat })
}

/// Unbiased gradient estimate with budget k: k/2 uniform without-replacement
/// draws build v, and k/2 weighted with-replacement draws build y_hat.
///
/// When w = 0 the prediction <w, x> is 0 with certainty, so no budget is
/// spent on y_hat and only k/2 units are consumed.
pub fn estimate_gradient(
    oracle: &mut AttributeOracle,
    w: &WeightVector,
    k: usize,
    rng: &mut RngStream,
) -> Result<GradientEstimate> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::OddBudget(k));
    }
    let d = oracle.dim();
    let v_subset = sample_subset(d, k / 2, rng)?;
    let mut draws = Vec::new();
    if w.l1_norm() > 0.0 {
        draws.reserve(k / 2);
        for _ in 0..k / 2 {
            draws.push(sample_weighted_index(w, rng)?);
        }
    }
    gradient_from_parts(oracle, w, &v_subset, &draws)
}
