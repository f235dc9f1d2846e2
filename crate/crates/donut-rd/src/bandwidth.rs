//! Worst-case-MSE bandwidth selection over a deterministic geometric grid.

use crate::error::{Error, Result};
use crate::estimator::{ll_weights, worst_case_bias};
use crate::kernel::KernelId;
use crate::sample::{DesignSpec, Sample};
use crate::variance::{nn_variance, se_hat};

/// Number of grid points searched.
const GRID_SIZE: usize = 64;
/// Number of smallest |x| values used to measure data spacing near the cutoff.
const SPACING_WINDOW: usize = 51;
/// Default neighbor count for the internal variance estimate.
const DEFAULT_NEIGHBORS: usize = 3;

/// Select the bandwidth minimizing the worst-case MSE proxy b̄²(h,d) + ŝ²(h,d)
/// over a 64-point geometric grid, using a nearest-neighbor variance estimate
/// with the default neighbor count. Ties break toward the smaller bandwidth.
pub fn select_bandwidth(sample: &Sample, m: f64, d: f64, kernel: KernelId) -> Result<f64> {
    let sigma2 = nn_variance(sample, DEFAULT_NEIGHBORS)?;
    select_bandwidth_with(sample, m, d, kernel, &sigma2)
}

/// Same as [`select_bandwidth`] with caller-supplied per-observation
/// variances, so repeated selections on one sample reuse them.
pub fn select_bandwidth_with(
    sample: &Sample,
    m: f64,
    d: f64,
    kernel: KernelId,
    sigma2: &[f64],
) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "bandwidth selection requires a strictly positive smoothness bound, got {m}"
        )));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidInput(format!(
            "donut radius must be nonnegative and finite, got {d}"
        )));
    }
    if sigma2.len() != sample.n() {
        return Err(Error::InvalidInput(format!(
            "variance length {} does not match sample size {}",
            sigma2.len(),
            sample.n()
        )));
    }
    if let Some(i) = sigma2.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "variance at index {i} must be nonnegative and finite, got {}",
            sigma2[i]
        )));
    }

    let mut best: Option<(f64, f64)> = None;
    for h in bandwidth_grid(sample.x(), d)? {
        let Ok(spec) = DesignSpec::new(h, d, kernel, m) else {
            continue;
        };
        let Ok(weights) = ll_weights(sample, &spec) else {
            continue;
        };
        let bias = worst_case_bias(&weights, sample, m)?;
        let se = se_hat(&weights, sigma2)?;
        let objective = bias * bias + se * se;
        // Strict improvement only: on ties the earlier (smaller) h stands.
        if best.is_none_or(|(_, incumbent)| objective < incumbent) {
            best = Some((h, objective));
        }
    }
    best.map(|(h, _)| h).ok_or(Error::NoFeasibleBandwidth)
}

/// The searched grid: 64 geometrically spaced bandwidths from
/// max(4 × median spacing of |x| near the cutoff, 1.05·d) up to max|x|.
/// Degenerate spacing falls back to the mean spacing, then to max|x|/n.
pub(crate) fn bandwidth_grid(xs: &[f64], d: f64) -> Result<Vec<f64>> {
    let mut abs: Vec<f64> = xs.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let h_max = *abs.last().expect("samples are nonempty");

    let near = &abs[..abs.len().min(SPACING_WINDOW)];
    let mut diffs: Vec<f64> = near.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(f64::total_cmp);
    let median = if diffs.len() % 2 == 1 {
        diffs[diffs.len() / 2]
    } else {
        0.5 * (diffs[diffs.len() / 2 - 1] + diffs[diffs.len() / 2])
    };
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let spacing = [median, mean, h_max / xs.len() as f64]
        .into_iter()
        .find(|v| v.is_finite() && *v > 0.0)
        .ok_or(Error::NoFeasibleBandwidth)?;

    let h_lo = (4.0 * spacing).max(1.05 * d);
    // Negated so a NaN endpoint also lands in the error branch.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(h_lo <= h_max) {
        return Err(Error::NoFeasibleBandwidth);
    }
    let ratio = h_max / h_lo;
    Ok((0..GRID_SIZE)
        .map(|i| {
            if i == GRID_SIZE - 1 {
                h_max
            } else {
                h_lo * ratio.powf(i as f64 / (GRID_SIZE - 1) as f64)
            }
        })
        .collect())
}
