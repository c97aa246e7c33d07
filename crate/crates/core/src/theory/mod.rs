//! Concentration functions, sample-size bounds and null space property
//! certification for small matrices.

mod bounds;
mod estimate;
mod kappa;
mod nsp;
mod simplex;

pub use bounds::{lambda_threshold, min_samples_kappa, min_samples_nsp, min_samples_stable_nsp};
pub use estimate::{estimate_d, PointSampler};
pub use kappa::{
    alpha_block_count, alpha_c1, check_kappa_condition, kappa_alpha, kappa_cmix, kappa_condition_sides, kappa_iid,
    kappa_ue, ue_validity_bound, KappaSpec,
};
pub use nsp::{kernel_basis, nsp_check, NspReport, KERNEL_RTOL, NSP_LP_BUDGET};
pub use simplex::{simplex_lp, LpSolution, LpStatus, LP_TOL};
