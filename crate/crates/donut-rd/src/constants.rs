//! Asymptotic kernel constants for donut local linear regression.
//!
//! For a kernel K and donut-to-bandwidth ratio c, the equivalent kernel is
//! J_K(u, c) = e1' (∫_c^1 (1,t)'(1,t) K(t) dt)^{-1} (1, u)', and the derived
//! constants are
//!   B_K(c) = ∫_c^1 J_K(u,c) K(u) u^2 du        (bias),
//!   S_K(c) = ∫_c^1 J_K(u,c)^2 K(u)^2 du        (variance),
//!   S~_K(c) = ∫_c^1 J_K(u,c) J_K(u,0) K(u)^2 du (cross term with the
//!                                                conventional weights).

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quadrature::{GaussLegendre, QuadratureSpec};

/// Determinant threshold below which the kernel range carries no usable
/// information and the equivalent kernel is numerically meaningless.
pub const MOMENT_DET_THRESHOLD: f64 = 1e-14;

/// Entries of the symmetric 2x2 kernel moment matrix ∫_c^1 (1,t)'(1,t)K(t)dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatrix {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl MomentMatrix {
    pub fn det(&self) -> f64 {
        self.m0 * self.m2 - self.m1 * self.m1
    }
}

/// The constants at one donut ratio, as emitted by [`constants_table`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelConstants {
    /// Donut-to-bandwidth ratio c = d/h.
    pub c: f64,
    /// Bias constant B_K(c); negative for the built-in kernels.
    pub bias: f64,
    /// Variance constant S_K(c); strictly positive.
    pub variance: f64,
    /// Cross constant S~_K(c); equals `variance` at c = 0.
    pub cross: f64,
}

fn validate_c(c: f64) -> Result<()> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidInput(format!(
            "donut ratio c must be finite and nonnegative, got {c}"
        )));
    }
    if c >= 1.0 {
        return Err(Error::EmptyRange { c });
    }
    Ok(())
}

/// Centered representation of the moment matrix: total kernel mass, kernel
/// mean position, and the central second moment on [c, 1]. The equivalent
/// kernel in these terms is J(u) = 1/m0 + mean (mean - u) / m2c, and the
/// determinant factors as m0 * m2c — both forms free of the catastrophic
/// cancellation that the raw m0 m2 - m1^2 expression suffers as c -> 1.
#[derive(Debug, Clone, Copy)]
struct CenteredMoments {
    m0: f64,
    mean: f64,
    m2c: f64,
}

impl CenteredMoments {
    fn compute(k: &dyn Kernel, c: f64, rule: &GaussLegendre) -> Result<Self> {
        validate_c(c)?;
        let m0 = rule.integrate(c, 1.0, |t| k.density(t));
        // Negated so a NaN mass (ill-behaved custom kernel) also errors.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(m0 > 0.0) {
            return Err(Error::DegenerateKernelRange {
                c,
                det: 0.0,
                threshold: MOMENT_DET_THRESHOLD,
            });
        }
        let m1 = rule.integrate(c, 1.0, |t| t * k.density(t));
        let mean = m1 / m0;
        let m2c = rule.integrate(c, 1.0, |t| (t - mean) * (t - mean) * k.density(t));
        let det = m0 * m2c;
        if det < MOMENT_DET_THRESHOLD {
            return Err(Error::DegenerateKernelRange {
                c,
                det,
                threshold: MOMENT_DET_THRESHOLD,
            });
        }
        Ok(CenteredMoments { m0, mean, m2c })
    }

    #[inline]
    fn equiv(&self, u: f64) -> f64 {
        1.0 / self.m0 + self.mean * (self.mean - u) / self.m2c
    }
}

/// Kernel moment matrix on [c, 1].
pub fn moment_matrix(k: &dyn Kernel, c: f64, quad: &QuadratureSpec) -> Result<MomentMatrix> {
    let rule = quad.rule();
    // Degeneracy is judged on the stable factored determinant.
    let cm = CenteredMoments::compute(k, c, &rule)?;
    let m1 = cm.m0 * cm.mean;
    let m2 = rule.integrate(c, 1.0, |t| t * t * k.density(t));
    Ok(MomentMatrix { m0: cm.m0, m1, m2 })
}

/// Equivalent kernel J_K(u, c): the asymptotic local linear weight profile.
pub fn equiv_kernel(k: &dyn Kernel, u: f64, c: f64, quad: &QuadratureSpec) -> Result<f64> {
    validate_c(c)?;
    if !u.is_finite() || u < c || u > 1.0 {
        return Err(Error::DomainError { u, c });
    }
    let rule = quad.rule();
    let cm = CenteredMoments::compute(k, c, &rule)?;
    Ok(cm.equiv(u))
}

/// Bias constant B_K(c).
pub fn bias_constant(k: &dyn Kernel, c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let rule = quad.rule();
    bias_constant_with_rule(k, c, &rule)
}

fn bias_constant_with_rule(k: &dyn Kernel, c: f64, rule: &GaussLegendre) -> Result<f64> {
    let cm = CenteredMoments::compute(k, c, rule)?;
    Ok(rule.integrate(c, 1.0, |u| cm.equiv(u) * k.density(u) * u * u))
}

/// Variance constant S_K(c).
pub fn variance_constant(k: &dyn Kernel, c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let rule = quad.rule();
    variance_constant_with_rule(k, c, &rule)
}

fn variance_constant_with_rule(k: &dyn Kernel, c: f64, rule: &GaussLegendre) -> Result<f64> {
    let cm = CenteredMoments::compute(k, c, rule)?;
    Ok(rule.integrate(c, 1.0, |u| {
        let j = cm.equiv(u);
        let kd = k.density(u);
        j * j * kd * kd
    }))
}

/// Cross constant S~_K(c) linking donut and conventional weight profiles.
pub fn cross_constant(k: &dyn Kernel, c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let rule = quad.rule();
    cross_constant_with_rule(k, c, &rule)
}

fn cross_constant_with_rule(k: &dyn Kernel, c: f64, rule: &GaussLegendre) -> Result<f64> {
    let cm_c = CenteredMoments::compute(k, c, rule)?;
    let cm_0 = CenteredMoments::compute(k, 0.0, rule)?;
    Ok(rule.integrate(c, 1.0, |u| {
        let kd = k.density(u);
        cm_c.equiv(u) * cm_0.equiv(u) * kd * kd
    }))
}

/// All three constants at one ratio.
pub fn kernel_constants(k: &dyn Kernel, c: f64, quad: &QuadratureSpec) -> Result<KernelConstants> {
    let rule = quad.rule();
    kernel_constants_with_rule(k, c, &rule)
}

fn kernel_constants_with_rule(
    k: &dyn Kernel,
    c: f64,
    rule: &GaussLegendre,
) -> Result<KernelConstants> {
    Ok(KernelConstants {
        c,
        bias: bias_constant_with_rule(k, c, rule)?,
        variance: variance_constant_with_rule(k, c, rule)?,
        cross: cross_constant_with_rule(k, c, rule)?,
    })
}

/// Evaluate the constants along a grid of ratios, e.g. for tabulating the
/// donut-to-conventional ratio curves.
pub fn constants_table(
    k: &dyn Kernel,
    c_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<KernelConstants>> {
    let rule = quad.rule();
    c_grid
        .iter()
        .map(|&c| kernel_constants_with_rule(k, c, &rule))
        .collect()
}
