//! Folded-normal critical values, bias-aware confidence intervals, worst-case
//! p-values, the asymptotic CI length ratio, and the large-donut identified
//! set.

use serde::Serialize;

use crate::constants::kernel_constants;
use crate::error::{Error, Result};
use crate::estimator::tau_hat;
use crate::kernel::KernelId;
use crate::normal::{norm_cdf, norm_quantile};
use crate::quadrature::QuadratureSpec;
use crate::sample::{DesignSpec, Sample};

/// Width tolerance of the critical-value bisection.
const CV_BISECTION_TOL: f64 = 1e-11;

/// A bias-aware confidence interval τ̂ ± cv(b̄/ŝ)·ŝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    /// Point estimate at the interval center.
    pub center: f64,
    pub half_length: f64,
    pub alpha: f64,
    /// Folded-normal critical value used.
    pub cv: f64,
    /// b̄/ŝ, the bias-to-standard-error ratio the critical value absorbs.
    pub bias_ratio: f64,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_length
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_length
    }
}

/// The interval of treatment effects consistent with the data when the donut
/// excludes the cutoff neighborhood: linear extrapolation midpoint ± M·d².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentifiedSet {
    pub midpoint: f64,
    pub half_width: f64,
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "significance level must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    Ok(())
}

/// The 1−α quantile of |N(r, 1)|: the critical value c solving
/// Φ(c−r) − Φ(−c−r) = 1−α.
///
/// Bisection runs on the provable two-sided bracket
/// z_{1−α/2} ≤ cv ≤ r + z_{1−α/2}: the lower bound because |N(r,1)|
/// stochastically dominates |N(0,1)| (Gaussian unimodality), the upper bound
/// because P(|Z+r| > r + z_{1−α/2}) ≤ α/2 + α/2.
pub fn cv_folded_normal(r: f64, alpha: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "bias ratio must be nonnegative and finite, got {r}"
        )));
    }
    validate_alpha(alpha)?;
    let z_half = norm_quantile(1.0 - alpha / 2.0)?;
    // Nudge the endpoints outward so roundoff cannot spoil the sign change.
    let mut lo = (z_half - 1e-9).max(0.0);
    let mut hi = r + z_half + 1e-9;
    let coverage_gap = |c: f64| norm_cdf(c - r) - norm_cdf(-c - r) - (1.0 - alpha);
    for _ in 0..200 {
        if hi - lo <= CV_BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if coverage_gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Confidence interval τ̂ ± cv_{1−α}(b̄/ŝ)·ŝ that keeps 1−α coverage over the
/// whole smoothness class generating bias up to b̄.
pub fn bias_aware_ci(
    tau_hat: f64,
    b_bar: f64,
    s_hat: f64,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    if !tau_hat.is_finite() {
        return Err(Error::InvalidInput(format!(
            "point estimate must be finite, got {tau_hat}"
        )));
    }
    if !b_bar.is_finite() || b_bar < 0.0 {
        return Err(Error::InvalidInput(format!(
            "bias bound must be nonnegative and finite, got {b_bar}"
        )));
    }
    if !s_hat.is_finite() || s_hat < 0.0 {
        return Err(Error::InvalidInput(format!(
            "standard error must be nonnegative and finite, got {s_hat}"
        )));
    }
    if s_hat == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let bias_ratio = b_bar / s_hat;
    let cv = cv_folded_normal(bias_ratio, alpha)?;
    Ok(ConfidenceInterval {
        center: tau_hat,
        half_length: cv * s_hat,
        alpha,
        cv,
        bias_ratio,
    })
}

/// Worst-case p-value of a t-statistic whose absolute bias may reach r
/// standard errors: p = 1 − Φ(|t|−r) + Φ(−|t|−r). Satisfies p ≤ α exactly
/// when |t| exceeds cv_{1−α}(r).
pub fn worst_case_pvalue(t: f64, r: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "t-statistic must be finite, got {t}"
        )));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "bias ratio must be nonnegative and finite, got {r}"
        )));
    }
    let a = t.abs();
    Ok((1.0 - norm_cdf(a - r) + norm_cdf(-a - r)).min(1.0))
}

/// Asymptotic length ratio of the bias-aware donut CI to the conventional
/// one at donut fraction c: [cv(½·|B(c)|√S(0) / (√S(c)|B(0)|)) / cv(½)]·√(S(c)/S(0)).
/// The bias-constant ratio enters in absolute value: it is a bias magnitude.
pub fn ci_length_ratio(kernel: KernelId, c: f64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let quad = QuadratureSpec::default();
    let at_c = kernel_constants(&kernel, c, &quad)?;
    let at_zero = kernel_constants(&kernel, 0.0, &quad)?;
    // Grouped so that c = 0 yields a bitwise-identical numerator and
    // denominator, making the ratio exactly one.
    let r_d = 0.5
        * ((at_c.bias.abs() * at_zero.variance.sqrt())
            / (at_c.variance.sqrt() * at_zero.bias.abs()));
    let cv_donut = cv_folded_normal(r_d, alpha)?;
    let cv_conventional = cv_folded_normal(0.5, alpha)?;
    Ok(cv_donut / cv_conventional * (at_c.variance / at_zero.variance).sqrt())
}

/// The set of jumps consistent with curvature up to M when extrapolating
/// across the donut: midpoint τ̂(h,d), half-width M·d².
pub fn identified_set(sample: &Sample, spec: &DesignSpec) -> Result<IdentifiedSet> {
    let fit = tau_hat(sample, spec)?;
    Ok(IdentifiedSet {
        midpoint: fit.tau_hat,
        half_width: spec.m() * spec.d() * spec.d(),
    })
}
