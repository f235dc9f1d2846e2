//! Donut regression-discontinuity estimation.
//!
//! This crate implements local linear "donut" RD estimation — re-estimating
//! a sharp RD design after excluding observations within a radius `d` of the
//! cutoff — together with:
//!
//! * finite-sample worst-case bias bounds over the class of outcomes whose
//!   regression function is twice differentiable away from the cutoff with
//!   second derivative bounded by `M`,
//! * bias-aware confidence intervals based on folded-normal critical values,
//! * specification tests that compare the donut estimate against the
//!   conventional estimate and against a fit inside the donut,
//! * the asymptotic kernel-constant engine behind all of the above, and
//! * a seeded, parallel Monte Carlo harness for validating the asymptotic
//!   approximations and reproducing simulation tables.

pub mod bandwidth;
pub mod constants;
pub mod dgp;
pub mod error;
pub mod estimator;
pub mod inference;
pub mod kernel;
pub mod montecarlo;
pub mod normal;
pub mod quadrature;
pub mod sample;
pub mod variance;

pub use bandwidth::{select_bandwidth, select_bandwidth_with};
pub use constants::{
    bias_constant, constants_table, cross_constant, equiv_kernel, kernel_constants, moment_matrix,
    variance_constant, KernelConstants, MomentMatrix,
};
pub use dgp::{gen_sample, mu, mu_l, DgpSpec, MuVariant, TheoreticalMoments};
pub use error::{Error, Result, Side};
pub use estimator::{ll_weights, tau_hat, worst_case_bias, FitResult, WeightVector};
pub use inference::{
    bias_aware_ci, ci_length_ratio, cv_folded_normal, identified_set, worst_case_pvalue,
    ConfidenceInterval, IdentifiedSet,
};
pub use kernel::{Kernel, KernelId};
pub use montecarlo::{
    run_replication, run_study, theoretical_bias_variance, ArmCells, ArmRecord, FailureCounts,
    ReplicationRecord, StudyResult, StudyRow,
};
pub use normal::{norm_cdf, norm_quantile};
pub use quadrature::{GaussLegendre, QuadratureSpec};
pub use sample::{sign0, DesignSpec, Sample};
pub use spec_test::{
    delta_test, delta_test_with, delta_variance_theory, gamma_test, gamma_test_with,
    SpecTestResult, TestMethod,
};
pub use variance::{nn_variance, se_hat, VarianceEstimate};
