use serde::{Deserialize, Serialize};

use crate::datagen::{CorruptionSpec, Dataset, Generator, GroundTruthPolynomial};
use crate::dictionary::{build_dictionary, normalize_columns};
use crate::error::{Error, Result};
use crate::solver::{solve, SolverParams};

/// Everything needed to simulate and score one recovery problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub d: usize,
    /// Dictionary degree.
    pub p: u32,
    pub truth: GroundTruthPolynomial,
    pub m: usize,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default)]
    pub corruption: CorruptionSpec,
    /// Amplitude of the `sin(2 pi x1)` model mismatch.
    #[serde(default)]
    pub mismatch_epsilon: f64,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truth.dim() != self.d {
            return Err(Error::DimensionMismatch { context: "truth dimension", expected: self.d, actual: self.truth.dim() });
        }
        if self.truth.max_term_degree() > self.p {
            return Err(Error::param(
                "truth",
                format!("a term has degree {} above the dictionary degree {}", self.truth.max_term_degree(), self.p),
            ));
        }
        if self.m == 0 {
            return Err(Error::param("m", "need at least one sample"));
        }
        if !(self.mismatch_epsilon >= 0.0 && self.mismatch_epsilon.is_finite()) {
            return Err(Error::param("mismatch_epsilon", "must be non-negative and finite"));
        }
        self.corruption.validate(self.m)?;
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Recovered coefficient support equals the true support.
    pub success_c: bool,
    /// Recovered corruption support equals the injected support.
    pub success_e: bool,
    pub success_joint: bool,
    /// `||c_true - c_hat||_1` in the raw monomial basis.
    pub l1_error_c: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Simulates data, solves and scores. Deterministic in `cfg`.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    cfg.validate()?;
    let ds = Dataset::simulate(&cfg.generator, &cfg.truth, cfg.m, &cfg.corruption, cfg.mismatch_epsilon, cfg.seed)?;
    let mut phi = build_dictionary(&ds.u, cfg.p)?;
    if cfg.normalize {
        phi = normalize_columns(&phi)?;
    }
    let sol = solve(&phi, &ds.y, &cfg.solver)?;
    let c_true = cfg.truth.coefficient_vector(&phi)?;
    let success_c = sol.c_support == cfg.truth.support(&phi)?;
    let success_e = sol.e_support == ds.corruption_support;
    let l1_error_c = sol.c.iter().zip(c_true.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok(TrialResult {
        success_c,
        success_e,
        success_joint: success_c && success_e,
        l1_error_c,
        iters: sol.iters_used,
        converged: sol.converged,
    })
}
