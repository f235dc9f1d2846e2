//! Local linear donut RD weights, the point estimator, and the finite-sample
//! worst-case bias bound.

use crate::error::{Error, Result, Side};
use crate::kernel::KernelId;
use crate::sample::{sign0, DesignSpec, Sample};

/// Relative determinant threshold below which a side's weighted design is
/// treated as rank-deficient instead of silently pseudo-inverted.
const RANK_DEFICIENCY_THRESHOLD: f64 = 1e-12;

/// Per-observation local linear RD weights, aligned with the sample. Right
/// (treated) side weights sum to +1, left side to -1, so the point estimate
/// is the plain inner product with the outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// Signed weights, zero outside the estimation window.
    pub w: Vec<f64>,
    /// Number of nonzero-weight observations with x >= 0.
    pub eff_n_plus: usize,
    /// Number of nonzero-weight observations with x < 0.
    pub eff_n_minus: usize,
}

/// A fitted donut RD regression: the jump estimate plus the two side lines.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Estimated jump at the cutoff.
    pub tau_hat: f64,
    pub weights: WeightVector,
    pub spec: DesignSpec,
    pub intercept_plus: f64,
    pub slope_plus: f64,
    pub intercept_minus: f64,
    pub slope_minus: f64,
}

/// Estimation window: kernel weights on d <= |x| <= h (or |x| < h when the
/// upper boundary is open, as in the within-donut fit of the gamma test).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Window {
    pub h: f64,
    pub d: f64,
    pub kernel: KernelId,
    pub open_upper: bool,
}

impl Window {
    pub(crate) fn closed(spec: &DesignSpec) -> Self {
        Self {
            h: spec.h(),
            d: spec.d(),
            kernel: spec.kernel(),
            open_upper: false,
        }
    }
}

/// Intercept and slope weights for both side fits, in sample order.
#[derive(Debug, Clone)]
pub(crate) struct FitCore {
    /// Signed intercept weights: +J-form on the right, -J-form on the left.
    pub w: Vec<f64>,
    /// Per-side slope weights in x units. Left entries belong to the left
    /// fit and right entries to the right fit; the sides never mix.
    pub slope_w: Vec<f64>,
    pub eff_n_plus: usize,
    pub eff_n_minus: usize,
}

/// One side's accumulated weighted moments in t = x/h units.
struct SideMoments {
    s0: f64,
    s1: f64,
    s2: f64,
    /// Indices of in-window observations with positive kernel weight.
    idx: Vec<usize>,
    /// First distinct x among the positive-weight points (to detect
    /// single-support-point designs).
    distinct: usize,
}

fn side_moments(xs: &[f64], win: &Window, side: Side) -> SideMoments {
    let mut m = SideMoments {
        s0: 0.0,
        s1: 0.0,
        s2: 0.0,
        idx: Vec::new(),
        distinct: 0,
    };
    let mut seen_x: Vec<f64> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let on_side = match side {
            Side::Plus => x >= 0.0,
            Side::Minus => x < 0.0,
        };
        let a = x.abs();
        let in_window = on_side && a >= win.d && if win.open_upper { a < win.h } else { a <= win.h };
        if !in_window {
            continue;
        }
        let t = x / win.h;
        let k = win.kernel.density_unchecked(t);
        if k <= 0.0 {
            continue;
        }
        m.s0 += k;
        m.s1 += k * t;
        m.s2 += k * t * t;
        m.idx.push(i);
        if !seen_x.contains(&x) {
            seen_x.push(x);
            m.distinct += 1;
        }
    }
    m
}

/// Compute intercept and slope weights for both sides over the given window.
pub(crate) fn fit_core(sample: &Sample, win: &Window) -> Result<FitCore> {
    let xs = sample.x();
    let n = xs.len();
    let mut core = FitCore {
        w: vec![0.0; n],
        slope_w: vec![0.0; n],
        eff_n_plus: 0,
        eff_n_minus: 0,
    };
    for side in [Side::Plus, Side::Minus] {
        let m = side_moments(xs, win, side);
        if m.distinct < 2 {
            return Err(Error::InsufficientSupport {
                side,
                detail: format!(
                    "need at least 2 distinct support points with positive kernel weight \
                     in {} <= |x| {} {}, found {}",
                    win.d,
                    if win.open_upper { "<" } else { "<=" },
                    win.h,
                    m.distinct
                ),
            });
        }
        let det = m.s0 * m.s2 - m.s1 * m.s1;
        if det < RANK_DEFICIENCY_THRESHOLD * m.s0 * m.s0 {
            return Err(Error::InsufficientSupport {
                side,
                detail: format!(
                    "weighted design is numerically rank-deficient \
                     (determinant {det:.3e} below threshold)"
                ),
            });
        }
        let sign = match side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        let mut eff_n = 0usize;
        for &i in &m.idx {
            let t = xs[i] / win.h;
            let k = win.kernel.density_unchecked(t);
            let wi = k * (m.s2 - m.s1 * t) / det;
            if wi != 0.0 {
                eff_n += 1;
            }
            core.w[i] = sign * wi;
            // Slope of the side line in t units is Σ k (s0 t - s1)/det · y;
            // dividing by h converts it to x units.
            core.slope_w[i] = k * (m.s0 * t - m.s1) / det / win.h;
        }
        match side {
            Side::Plus => core.eff_n_plus = eff_n,
            Side::Minus => core.eff_n_minus = eff_n,
        }
    }
    Ok(core)
}

/// Local linear donut RD weights for the given design. The estimate, the bias
/// bound, and the variance all derive from this one vector.
pub fn ll_weights(sample: &Sample, spec: &DesignSpec) -> Result<WeightVector> {
    let core = fit_core(sample, &Window::closed(spec))?;
    Ok(WeightVector {
        w: core.w,
        eff_n_plus: core.eff_n_plus,
        eff_n_minus: core.eff_n_minus,
    })
}

/// Fit the donut RD regression and return the jump estimate together with
/// both side lines. With d = 0 this is the conventional estimator.
pub fn tau_hat(sample: &Sample, spec: &DesignSpec) -> Result<FitResult> {
    let core = fit_core(sample, &Window::closed(spec))?;
    let ys = sample.y();
    let mut tau = 0.0;
    let mut intercept_plus = 0.0;
    let mut intercept_minus = 0.0;
    let mut slope_plus = 0.0;
    let mut slope_minus = 0.0;
    for (i, (&x, &y)) in sample.x().iter().zip(ys).enumerate() {
        tau += core.w[i] * y;
        if x >= 0.0 {
            intercept_plus += core.w[i] * y;
            slope_plus += core.slope_w[i] * y;
        } else {
            // Left weights carry the -1 side sign; the side intercept is the
            // unsigned weighted average.
            intercept_minus -= core.w[i] * y;
            slope_minus += core.slope_w[i] * y;
        }
    }
    Ok(FitResult {
        tau_hat: tau,
        weights: WeightVector {
            w: core.w,
            eff_n_plus: core.eff_n_plus,
            eff_n_minus: core.eff_n_minus,
        },
        spec: *spec,
        intercept_plus,
        slope_plus,
        intercept_minus,
        slope_minus,
    })
}

/// Worst-case absolute bias of a weighted RD contrast over the class of
/// functions whose second derivative is bounded by `m` on each side:
/// b̄ = -(M/2) Σ w_i x_i² sign(x_i), which is nonnegative for local linear
/// weights; tiny negative rounding residue is clamped to zero.
pub fn worst_case_bias(weights: &WeightVector, sample: &Sample, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::InvalidInput(format!(
            "smoothness bound must be nonnegative and finite, got {m}"
        )));
    }
    if weights.w.len() != sample.n() {
        return Err(Error::InvalidInput(format!(
            "weight vector length {} does not match sample size {}",
            weights.w.len(),
            sample.n()
        )));
    }
    let signed_sum: f64 = weights
        .w
        .iter()
        .zip(sample.x())
        .map(|(&w, &x)| w * x * x * sign0(x))
        .sum();
    Ok((-(m / 2.0) * signed_sum).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn four_point() -> Sample {
        Sample::new(vec![-0.5, -0.25, 0.25, 0.5], vec![1.0, 1.0, 3.0, 5.0]).unwrap()
    }

    fn uniform_spec(h: f64, d: f64, m: f64) -> DesignSpec {
        DesignSpec::new(h, d, KernelId::Uniform, m).unwrap()
    }

    #[test]
    fn two_point_sides_give_exact_extrapolation_weights() {
        // Each side is an exact two-point line fit extrapolated to zero:
        // intercept = 2 y(0.25) - y(0.5).
        let w = ll_weights(&four_point(), &uniform_spec(1.0, 0.0, 2.0)).unwrap();
        let expect = [1.0, -2.0, 2.0, -1.0];
        for (got, want) in w.w.iter().zip(expect) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
        }
        assert_eq!(w.eff_n_plus, 2);
        assert_eq!(w.eff_n_minus, 2);
    }

    #[test]
    fn weight_sums_reproduce_constants_and_kill_slope() {
        let sample = Sample::new(
            vec![-0.9, -0.6, -0.3, -0.15, 0.1, 0.2, 0.45, 0.8],
            vec![0.0; 8],
        )
        .unwrap();
        for kernel in KernelId::ALL {
            for (h, d) in [(1.0, 0.0), (1.0, 0.12), (0.7, 0.05)] {
                let spec = DesignSpec::new(h, d, kernel, 2.0).unwrap();
                let w = ll_weights(&sample, &spec).unwrap();
                let (mut sp, mut sm, mut xp, mut xm) = (0.0, 0.0, 0.0, 0.0);
                for (&wi, &x) in w.w.iter().zip(sample.x()) {
                    if x >= 0.0 {
                        sp += wi;
                        xp += wi * x;
                    } else {
                        sm += wi;
                        xm += wi * x;
                    }
                }
                assert_abs_diff_eq!(sp, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(sm, -1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(xp / h, 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(xm / h, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn donut_zeroes_inner_weights() {
        let sample = Sample::new(
            vec![-0.9, -0.6, -0.3, -0.05, 0.04, 0.2, 0.45, 0.8],
            vec![0.0; 8],
        )
        .unwrap();
        let spec = DesignSpec::new(1.0, 0.1, KernelId::Triangular, 2.0).unwrap();
        let w = ll_weights(&sample, &spec).unwrap();
        for (&wi, &x) in w.w.iter().zip(sample.x()) {
            if x.abs() < 0.1 {
                assert_eq!(wi, 0.0, "inner point x = {x} must carry zero weight");
            } else {
                assert!(wi != 0.0);
            }
        }
        assert_eq!(w.eff_n_plus, 3);
        assert_eq!(w.eff_n_minus, 3);
    }

    #[test]
    fn boundary_points_are_included() {
        // |x| = d stays in the window; |x| = h is in-window for the uniform
        // kernel (closed support) and weight-zero for kernels vanishing at 1.
        let sample = Sample::new(vec![-1.0, -0.5, -0.1, 0.1, 0.5, 1.0], vec![0.0; 6]).unwrap();
        let w = ll_weights(&sample, &uniform_spec(1.0, 0.1, 2.0)).unwrap();
        assert!(w.w.iter().all(|&wi| wi != 0.0));
        assert_eq!((w.eff_n_plus, w.eff_n_minus), (3, 3));

        let tri = DesignSpec::new(1.0, 0.1, KernelId::Triangular, 2.0).unwrap();
        let w = ll_weights(&sample, &tri).unwrap();
        assert_eq!(w.w[0], 0.0);
        assert_eq!(w.w[5], 0.0);
        assert_eq!((w.eff_n_plus, w.eff_n_minus), (2, 2));
    }

    #[test]
    fn insufficient_support_errors_name_the_side() {
        // d = 0.3 leaves one point per side.
        let err = ll_weights(&four_point(), &uniform_spec(1.0, 0.3, 2.0)).unwrap_err();
        assert!(matches!(err, Error::InsufficientSupport { .. }));

        // Duplicated x on the right: one distinct support point.
        let dup = Sample::new(vec![-0.5, -0.25, 0.25, 0.25], vec![0.0; 4]).unwrap();
        match ll_weights(&dup, &uniform_spec(1.0, 0.0, 2.0)).unwrap_err() {
            Error::InsufficientSupport { side, .. } => assert_eq!(side, Side::Plus),
            other => panic!("expected insufficient support, got {other:?}"),
        }

        // Triangular kernel with both right points at |x| = h: all kernel
        // weights vanish on that side.
        let edge = Sample::new(vec![-0.5, -0.25, 1.0, 1.0], vec![0.0; 4]).unwrap();
        let tri = DesignSpec::new(1.0, 0.0, KernelId::Triangular, 2.0).unwrap();
        match ll_weights(&edge, &tri).unwrap_err() {
            Error::InsufficientSupport { side, .. } => assert_eq!(side, Side::Plus),
            other => panic!("expected insufficient support, got {other:?}"),
        }
    }

    #[test]
    fn four_point_estimate_is_zero() {
        // Extrapolations: right 2·3 - 5 = 1, left 2·1 - 1 = 1.
        let fit = tau_hat(&four_point(), &uniform_spec(1.0, 0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(fit.tau_hat, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept_plus, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept_minus, 1.0, epsilon = 1e-12);
        // Right line through (0.25, 3), (0.5, 5): slope 8. Left line through
        // (-0.5, 1), (-0.25, 1): slope 0.
        assert_abs_diff_eq!(fit.slope_plus, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.slope_minus, 0.0, epsilon = 1e-12);
        assert_eq!(fit.spec, uniform_spec(1.0, 0.0, 2.0));
    }

    #[test]
    fn linear_outcomes_reproduce_the_jump_exactly() {
        let xs = vec![-0.83, -0.41, -0.27, -0.09, 0.06, 0.31, 0.52, 0.97];
        let (a, b, tau) = (0.7, -1.3, 2.5);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| a + b * x + if x >= 0.0 { tau } else { 0.0 })
            .collect();
        let sample = Sample::new(xs, ys).unwrap();
        for kernel in KernelId::ALL {
            for (h, d) in [(1.0, 0.0), (1.0, 0.1), (0.9, 0.07)] {
                let spec = DesignSpec::new(h, d, kernel, 2.0).unwrap();
                let fit = tau_hat(&sample, &spec).unwrap();
                assert_abs_diff_eq!(fit.tau_hat, tau, epsilon = 1e-9);
                assert_abs_diff_eq!(fit.slope_plus, b, epsilon = 1e-9);
                assert_abs_diff_eq!(fit.slope_minus, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tau_matches_weight_inner_product_and_intercept_difference() {
        let sample = Sample::new(
            vec![-0.9, -0.6, -0.3, -0.15, 0.1, 0.2, 0.45, 0.8],
            vec![0.3, -1.2, 0.8, 2.0, -0.4, 1.7, 0.9, -2.2],
        )
        .unwrap();
        let spec = DesignSpec::new(1.0, 0.12, KernelId::Epanechnikov, 2.0).unwrap();
        let fit = tau_hat(&sample, &spec).unwrap();
        let inner: f64 = fit
            .weights
            .w
            .iter()
            .zip(sample.y())
            .map(|(&w, &y)| w * y)
            .sum();
        assert_abs_diff_eq!(fit.tau_hat, inner, epsilon = 1e-10);
        assert_abs_diff_eq!(
            fit.tau_hat,
            fit.intercept_plus - fit.intercept_minus,
            epsilon = 1e-10
        );
    }

    #[test]
    fn donut_at_zero_is_bitwise_conventional() {
        let sample = Sample::new(
            vec![-0.9, -0.6, -0.3, -0.15, 0.1, 0.2, 0.45, 0.8],
            vec![0.3, -1.2, 0.8, 2.0, -0.4, 1.7, 0.9, -2.2],
        )
        .unwrap();
        for kernel in KernelId::ALL {
            let donut_zero = DesignSpec::new(0.85, 0.0, kernel, 2.0).unwrap();
            let fit = tau_hat(&sample, &donut_zero).unwrap();
            let again = tau_hat(&sample, &donut_zero).unwrap();
            assert_eq!(fit.tau_hat.to_bits(), again.tau_hat.to_bits());
            assert_eq!(fit.weights, again.weights);
        }
    }

    #[test]
    fn worst_case_bias_four_point_example() {
        let sample = four_point();
        let spec = uniform_spec(1.0, 0.0, 2.0);
        let w = ll_weights(&sample, &spec).unwrap();
        // -(2/2)·((+1)(0.25)(-1) + (-2)(0.0625)(-1) + (2)(0.0625)(1) + (-1)(0.25)(1))
        //   = -1·(-0.25) = 0.25
        let b = worst_case_bias(&w, &sample, 2.0).unwrap();
        assert_abs_diff_eq!(b, 0.25, epsilon = 1e-12);

        // Zero smoothness bound kills the bias bound; doubling M doubles it.
        assert_eq!(worst_case_bias(&w, &sample, 0.0).unwrap(), 0.0);
        let b4 = worst_case_bias(&w, &sample, 4.0).unwrap();
        assert_abs_diff_eq!(b4, 2.0 * b, epsilon = 1e-12);

        assert!(worst_case_bias(&w, &sample, -1.0).is_err());
        assert!(worst_case_bias(&w, &sample, f64::NAN).is_err());
    }

    #[test]
    fn worst_case_bias_is_nonnegative_on_irregular_designs() {
        let sample = Sample::new(
            vec![-0.93, -0.78, -0.41, -0.12, -0.03, 0.02, 0.19, 0.33, 0.64, 0.88],
            vec![0.0; 10],
        )
        .unwrap();
        for kernel in KernelId::ALL {
            for (h, d) in [(1.0, 0.0), (0.95, 0.05), (0.9, 0.25)] {
                let spec = DesignSpec::new(h, d, kernel, 3.0).unwrap();
                let w = ll_weights(&sample, &spec).unwrap();
                let b = worst_case_bias(&w, &sample, 3.0).unwrap();
                assert!(b >= 0.0, "kernel {kernel:?} h={h} d={d}: bias bound {b}");
            }
        }
    }
}
