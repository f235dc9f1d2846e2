//! Nearest-neighbor conditional variance estimates and the plug-in standard
//! error of a weighted RD contrast.

use crate::error::{Error, Result, Side};
use crate::estimator::WeightVector;
use crate::sample::Sample;

/// Per-observation variance estimates with the implied standard error of a
/// weighted contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    /// σ̂_i² aligned with the sample.
    pub sigma2: Vec<f64>,
    /// ŝ = √(Σ w_i² σ̂_i²).
    pub s_hat: f64,
}

impl VarianceEstimate {
    pub fn new(weights: &WeightVector, sigma2: Vec<f64>) -> Result<Self> {
        let s_hat = se_hat(weights, &sigma2)?;
        Ok(Self { sigma2, s_hat })
    }
}

/// Nearest-neighbor conditional variance: for each observation,
/// σ̂_i² = (J/(J+1))·(y_i − mean of the J same-side nearest neighbors)².
/// Neighbors are ranked by |x_j − x_i| with ties broken toward the smaller
/// original index.
pub fn nn_variance(sample: &Sample, j: usize) -> Result<Vec<f64>> {
    if j == 0 {
        return Err(Error::InvalidInput(
            "neighbor count must be positive".into(),
        ));
    }
    let xs = sample.x();
    let ys = sample.y();
    let mut sigma2 = vec![0.0; sample.n()];
    for side in [Side::Plus, Side::Minus] {
        // Original indices of this side, sorted by x so that candidate
        // neighbors always form a contiguous run around each point.
        let mut order: Vec<usize> = (0..sample.n())
            .filter(|&i| match side {
                Side::Plus => xs[i] >= 0.0,
                Side::Minus => xs[i] < 0.0,
            })
            .collect();
        if order.len() <= j {
            return Err(Error::InsufficientNeighbors {
                side,
                needed: j + 1,
                found: order.len(),
            });
        }
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));

        for (pos, &i) in order.iter().enumerate() {
            // Expand left/right in sorted order, always absorbing the nearer
            // unvisited point, until j candidates are collected; then keep
            // absorbing exact distance ties so index tie-breaking sees them.
            // Collected distances are non-decreasing, so once a distance
            // strictly exceeds the current maximum the window is complete.
            let mut lo = pos;
            let mut hi = pos;
            let mut cand: Vec<(f64, usize)> = Vec::with_capacity(j + 2);
            loop {
                let left = lo.checked_sub(1).map(|p| (xs[i] - xs[order[p]], p));
                let right = (hi + 1 < order.len()).then(|| (xs[order[hi + 1]] - xs[i], hi + 1));
                let pick_left = match (left, right) {
                    (Some((dl, _)), Some((dr, _))) => dl <= dr,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => break,
                };
                let (d, p) = if pick_left {
                    left.unwrap()
                } else {
                    right.unwrap()
                };
                if cand.len() >= j && cand.last().is_some_and(|&(dmax, _)| d > dmax) {
                    break;
                }
                cand.push((d, order[p]));
                if pick_left {
                    lo = p;
                } else {
                    hi = p;
                }
            }
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mean: f64 = cand[..j].iter().map(|&(_, k)| ys[k]).sum::<f64>() / j as f64;
            let resid = ys[i] - mean;
            sigma2[i] = (j as f64 / (j as f64 + 1.0)) * resid * resid;
        }
    }
    Ok(sigma2)
}

/// Standard error of the weighted contrast: √(Σ w_i² σ̂_i²).
pub fn se_hat(weights: &WeightVector, sigma2: &[f64]) -> Result<f64> {
    if weights.w.len() != sigma2.len() {
        return Err(Error::InvalidInput(format!(
            "weight vector length {} does not match variance length {}",
            weights.w.len(),
            sigma2.len()
        )));
    }
    for (i, &v) in sigma2.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInput(format!(
                "variance at index {i} must be nonnegative and finite, got {v}"
            )));
        }
    }
    let total: f64 = weights
        .w
        .iter()
        .zip(sigma2)
        .map(|(&w, &s2)| w * w * s2)
        .sum();
    Ok(total.sqrt())
}
