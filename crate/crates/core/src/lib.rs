//! Recovery of sparse multivariate polynomials from dependent, outlier-corrupted
//! samples by corrupted basis pursuit, plus the supporting theory toolkit and
//! a Monte Carlo experiment harness.

pub mod datagen;
pub mod dictionary;
mod error;
pub mod experiments;
pub mod solver;
pub mod theory;

pub use datagen::{CorruptionSpec, CorruptionTarget, Dataset, Generator, GroundTruthPolynomial};
pub use dictionary::{AugmentedMatrix, DesignMatrix, MultiIndex};
pub use error::{Error, Result};
pub use experiments::{ExperimentReport, TrialConfig, TrialResult};
pub use solver::{RecoverySolution, SolverParams};
pub use theory::{KappaSpec, NspReport};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
