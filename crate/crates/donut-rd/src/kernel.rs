use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The built-in second-order kernels, as symmetric densities on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelId {
    /// K(u) = 1/2.
    Uniform,
    /// K(u) = 1 - |u|.
    Triangular,
    /// K(u) = (3/4)(1 - u^2).
    Epanechnikov,
}

impl KernelId {
    pub const ALL: [KernelId; 3] = [
        KernelId::Uniform,
        KernelId::Triangular,
        KernelId::Epanechnikov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelId::Uniform => "uniform",
            KernelId::Triangular => "triangular",
            KernelId::Epanechnikov => "epanechnikov",
        }
    }

    /// Density value at `u`; exactly zero outside [-1, 1]. The support is
    /// closed, so |u| = 1 evaluates the density formula itself.
    pub fn eval(self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kernel argument must be finite, got {u}"
            )));
        }
        Ok(self.density_unchecked(u))
    }

    /// Infallible density for callers that have already validated finiteness.
    /// Non-finite arguments map to zero.
    #[inline]
    pub(crate) fn density_unchecked(self, u: f64) -> f64 {
        if !u.is_finite() || u.abs() > 1.0 {
            return 0.0;
        }
        match self {
            KernelId::Uniform => 0.5,
            KernelId::Triangular => 1.0 - u.abs(),
            KernelId::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(KernelId::Uniform),
            "triangular" => Ok(KernelId::Triangular),
            "epanechnikov" => Ok(KernelId::Epanechnikov),
            other => Err(Error::InvalidInput(format!(
                "unknown kernel {other:?}; expected one of uniform, triangular, epanechnikov"
            ))),
        }
    }
}

/// Extension point for user-supplied kernels: any bounded symmetric density
/// on [-1, 1]. The asymptotic-constant engine accepts any implementor; the
/// estimation layer itself works with the built-in [`KernelId`] set.
pub trait Kernel {
    /// Density at `u`. Must be symmetric, nonnegative, zero outside [-1, 1],
    /// and integrate to one.
    fn density(&self, u: f64) -> f64;

    /// Human-readable name used in reports.
    fn label(&self) -> &str;
}

impl Kernel for KernelId {
    fn density(&self, u: f64) -> f64 {
        self.density_unchecked(u)
    }

    fn label(&self) -> &str {
        self.name()
    }
}
