//! Euclidean projection onto L1 and L2 balls.

use crate::error::{Error, Result};
use crate::model::WeightVector;

/// Result of an L1 projection: the projected vector and the soft-threshold
/// level that produced it (0 when the input was already feasible).
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub u: WeightVector,
    pub threshold: f64,
}

/// Euclidean projection of w onto { u : ||u||_1 <= B }.
///
/// Sort-then-threshold, O(d log d): the projection soft-thresholds every
/// component at the unique level theta with sum_i max(|w_i| - theta, 0) = B.
pub fn project_l1(w: &WeightVector, b: f64) -> Result<ProjectionResult> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::NonPositiveRadius(b));
    }
    if w.l1_norm() <= b {
        return Ok(ProjectionResult {
            u: w.clone(),
            threshold: 0.0,
        });
    }
    let mut mags: Vec<f64> = w.as_slice().iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - b) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let u = WeightVector::new(
        w.as_slice()
            .iter()
            .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
            .collect(),
    )
    .expect("finite by construction");
    Ok(ProjectionResult {
        u,
        threshold: theta,
    })
}

/// Euclidean projection of w onto { u : ||u||_2 <= B }: identity inside the
/// ball, radial rescale outside.
pub fn project_l2(w: &WeightVector, b: f64) -> Result<WeightVector> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::NonPositiveRadius(b));
    }
    let norm = w.l2_norm();
    if norm <= b {
        return Ok(w.clone());
    }
    let mut u = w.clone();
    u.scale(b / norm);
    Ok(u)
}
