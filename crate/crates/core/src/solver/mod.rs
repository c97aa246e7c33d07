//! Corrupted basis pursuit
//! `min ||c||_1 + lambda ||e||_1  s.t.  ||y - Phi c - e||_2 <= sigma`
//! solved as `min ||w||_1  s.t.  ||y - A w||_2 <= sigma` with
//! `A = [lambda^-1 I, Phi]` and `w = [lambda e, c]`.

mod dr;
mod factor;
mod prox;

pub use dr::{douglas_rachford, SolverState};
pub use factor::{precompute_normal_factorization, NormalFactorization, ReducedSide};
pub use prox::{project_ball, prox_g1, prox_g2, shrink};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dictionary::{AugmentedMatrix, DesignMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the shadow-sequence step over `max(1, ||shadow||)` falls below this.
    pub tol: f64,
    /// Entries with magnitude at most this are outside the reported supports.
    pub support_threshold: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            gamma: 1.0,
            sigma: 1e-10,
            lambda: 1.0,
            max_iters: 20_000,
            tol: 1e-11,
            support_threshold: 1e-4,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", "must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", "must be non-negative"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if !(self.support_threshold >= 0.0) {
            return Err(Error::param("support_threshold", "must be non-negative"));
        }
        Ok(())
    }
}

/// Unpacked solver output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoverySolution {
    /// Coefficients in the raw monomial basis.
    pub c: Vec<f64>,
    /// Corruption estimate `lambda^-1 * w[..m]`.
    pub e: Vec<f64>,
    /// Support of the solver-scale coefficients (before undoing normalization).
    pub c_support: Vec<usize>,
    pub e_support: Vec<usize>,
    /// `||c||_1 + lambda ||e||_1` on the solver's (possibly normalized) scale.
    pub objective: f64,
    /// `||y - Phi c - e||_2`.
    pub residual: f64,
    #[serde(rename = "iters")]
    pub iters_used: usize,
    pub converged: bool,
}

impl RecoverySolution {
    fn unpack(
        a: &AugmentedMatrix,
        y: &DVector<f64>,
        params: &SolverParams,
        (state, converged): &(SolverState, bool),
    ) -> Self {
        let m = a.rows();
        let r = a.phi().cols();
        let w = &state.w;
        let c_solver = w.rows(m, r).into_owned();
        let e = w.rows(0, m) / a.lambda();
        let residual = (y - a.apply(w).expect("length checked")).norm();
        let tau = params.support_threshold;
        RecoverySolution {
            c: a.phi().rescale_coefficients(&c_solver).iter().copied().collect(),
            e: e.iter().copied().collect(),
            c_support: threshold_support(&c_solver, tau),
            e_support: threshold_support(&e, tau),
            objective: w.lp_norm(1),
            residual,
            iters_used: state.iter,
            converged: *converged,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Indices with `|x_j| > tau`.
pub fn threshold_support(x: &DVector<f64>, tau: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tau)
        .map(|(j, _)| j)
        .collect()
}

/// Builds the augmented operator for `phi` and runs the solver.
pub fn solve(phi: &DesignMatrix, y: &DVector<f64>, params: &SolverParams) -> Result<RecoverySolution> {
    params.validate()?;
    let a = AugmentedMatrix::new(phi.clone(), params.lambda)?;
    douglas_rachford(&a, y, params)
}
