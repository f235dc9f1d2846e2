use std::fmt;

use thiserror::Error;

/// Which side of the cutoff an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Treated side, x >= 0.
    Plus,
    /// Control side, x < 0.
    Minus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => write!(f, "right (x >= 0)"),
            Side::Minus => write!(f, "left (x < 0)"),
        }
    }
}

/// All failure modes of the estimation, inference, and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: non-finite numbers, negative scale parameters,
    /// mismatched lengths, out-of-range probabilities, and similar.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The integration range [c, 1] is empty.
    #[error("empty integration range: donut ratio c = {c} must be below 1")]
    EmptyRange { c: f64 },

    /// The kernel moment matrix on [c, 1] is numerically singular, so the
    /// equivalent kernel is undefined.
    #[error(
        "degenerate kernel range at c = {c}: moment determinant {det:.3e} \
         is below the threshold {threshold:.0e}"
    )]
    DegenerateKernelRange { c: f64, det: f64, threshold: f64 },

    /// Argument outside the equivalent kernel's domain [c, 1].
    #[error("u = {u} is outside the equivalent-kernel domain [{c}, 1]")]
    DomainError { u: f64, c: f64 },

    /// A side of the cutoff lacks enough usable observations for a local
    /// linear fit (fewer than 2 distinct support points, or a numerically
    /// rank-deficient design).
    #[error("insufficient support on the {side} side: {detail}")]
    InsufficientSupport { side: Side, detail: String },

    /// A side has too few observations for the requested nearest-neighbor
    /// count.
    #[error(
        "insufficient neighbors on the {side} side: need at least {needed} \
         observations, found {found}"
    )]
    InsufficientNeighbors {
        side: Side,
        needed: usize,
        found: usize,
    },

    /// No bandwidth in the search grid admits a valid fit.
    #[error("no feasible bandwidth in the search grid")]
    NoFeasibleBandwidth,

    /// The plug-in standard error is zero, so no confidence statement is
    /// possible.
    #[error("degenerate variance: the estimated standard error is zero")]
    DegenerateVariance,

    /// A specification test is vacuous for the given design (for example a
    /// zero donut radius, or an empty donut so the compared weight vectors
    /// coincide).
    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    /// The within-donut fit lacks enough observations strictly inside the
    /// donut.
    #[error("insufficient inner support on the {side} side: {detail}")]
    InsufficientInnerSupport { side: Side, detail: String },
}

impl Error {
    /// True for failure modes that reflect a statistical degeneracy of the
    /// data/design combination rather than malformed configuration.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateKernelRange { .. }
                | Error::InsufficientSupport { .. }
                | Error::InsufficientNeighbors { .. }
                | Error::NoFeasibleBandwidth
                | Error::DegenerateVariance
                | Error::DegenerateTest(_)
                | Error::InsufficientInnerSupport { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
