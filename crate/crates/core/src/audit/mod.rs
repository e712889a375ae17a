//! Verification harness.
//!
//! Monte-Carlo audits compare sampled noise against the closed-form targets
//! (Laplace marginals, atom mass `(ε1/ε2)²`, correlation `ε1/ε2`, MSE
//! `2n/ε²`). Numerical audits use quadrature to check that the kernels
//! compose and marginalize correctly, and scan a grid for the largest
//! log-density slope with respect to the private value.

mod numeric;
mod report;
mod statistical;
pub mod suite;

pub use numeric::{
    chapman_kolmogorov_audit, kernel_normalization_audit, laplace_slope_audit,
    lipschitz_grid_audit, marginal_consistency_audit, max_log_slope_1d, max_log_slope_2d,
    naive_pair_slope_audit, GridSpec,
};
pub use report::{summary_table, AuditReport};
pub use statistical::{
    atom_fraction_audit, atom_mass_audit, correlation_audit, independence_audit, ks_one_sample,
    ks_two_sample, mse_audit, MIN_KS_SAMPLES, MIN_OBSERVATIONS,
};
pub use suite::{run_suite, Suite};
