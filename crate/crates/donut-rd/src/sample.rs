//! Cutoff-normalized samples and estimation designs.

use crate::error::{Error, Result};
use crate::kernel::KernelId;

/// Side convention used throughout the crate: treatment is `x >= 0`, so zero
/// belongs to the treated (right) side and `sign0(0.0) = 1.0`.
pub fn sign0(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Paired (running variable, outcome) observations with the cutoff already
/// normalized to zero. Treatment is implicit: `T_i = 1{x_i >= 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Sample {
    /// Minimum data size: two observations per side are needed for any
    /// local linear fit.
    pub const MIN_OBSERVATIONS: usize = 4;

    /// Validate and wrap raw data. The running variable must already be
    /// centered at the cutoff.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "running variable has {} observations but outcomes have {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < Self::MIN_OBSERVATIONS {
            return Err(Error::InvalidInput(format!(
                "need at least {} observations, got {}",
                Self::MIN_OBSERVATIONS,
                x.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "running variable at index {i} is not finite ({})",
                x[i]
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "outcome at index {i} is not finite ({})",
                y[i]
            )));
        }
        let treated = x.iter().filter(|&&v| v >= 0.0).count();
        if treated == 0 {
            return Err(Error::InvalidInput(
                "no observations with x >= 0 (treated side is empty)".into(),
            ));
        }
        if treated == x.len() {
            return Err(Error::InvalidInput(
                "no observations with x < 0 (control side is empty)".into(),
            ));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// Estimation design: bandwidth `h`, donut radius `d < h`, kernel, and the
/// second-derivative smoothness bound `M` defining the function class the
/// bias bound is taken over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    h: f64,
    d: f64,
    kernel: KernelId,
    m: f64,
}

impl DesignSpec {
    pub fn new(h: f64, d: f64, kernel: KernelId, m: f64) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "bandwidth must be positive and finite, got {h}"
            )));
        }
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidInput(format!(
                "donut radius must be nonnegative and finite, got {d}"
            )));
        }
        if d >= h {
            return Err(Error::InvalidInput(format!(
                "donut radius must be smaller than the bandwidth, got d = {d} >= h = {h}"
            )));
        }
        if !m.is_finite() || m < 0.0 {
            return Err(Error::InvalidInput(format!(
                "smoothness bound must be nonnegative and finite, got {m}"
            )));
        }
        Ok(Self { h, d, kernel, m })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn kernel(&self) -> KernelId {
        self.kernel
    }

    /// Smoothness bound M of the function class.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// The donut-to-bandwidth ratio c = d/h in [0, 1).
    pub fn donut_ratio(&self) -> f64 {
        self.d / self.h
    }
}
