use nalgebra::DVector;

use super::factor::NormalFactorization;
use super::prox::{project_ball_in_place, shrink_in_place};
use super::{RecoverySolution, SolverParams};
use crate::dictionary::AugmentedMatrix;
use crate::error::{Error, Result};

/// Iterates of the splitting: shadow `(w_tilde, v_tilde)` and its `g1`-prox `(w, v)`.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub w_tilde: DVector<f64>,
    pub v_tilde: DVector<f64>,
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub iter: usize,
}

impl SolverState {
    /// `w_tilde = 0`, `v_tilde = y`.
    pub fn initial(a: &AugmentedMatrix, y: &DVector<f64>, params: &SolverParams) -> Self {
        let w_tilde = DVector::zeros(a.total_cols());
        let v_tilde = y.clone();
        let mut w = w_tilde.clone();
        let mut v = v_tilde.clone();
        shrink_in_place(&mut w, params.gamma);
        project_ball_in_place(&mut v, y, params.sigma);
        SolverState {
            w_tilde,
            v_tilde,
            w,
            v,
            iter: 0,
        }
    }
}

/// Minimizes `||w||_1` subject to `||y - A w||_2 <= sigma` by Douglas-Rachford
/// splitting between `g1 = ||w||_1 + indicator(ball)` and `g2 = indicator(v = A w)`.
///
/// Each step is `z <- z/2 + rprox_g2(rprox_g1(z))/2` on the shadow pair, which
/// simplifies to `z <- z + prox_g2(2 p - z) - p` with `p = prox_g1(z)`.
pub fn douglas_rachford(
    a: &AugmentedMatrix,
    y: &DVector<f64>,
    params: &SolverParams,
) -> Result<RecoverySolution> {
    params.validate()?;
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "douglas_rachford (y)",
            expected: a.rows(),
            actual: y.len(),
        });
    }
    let fact = NormalFactorization::new(a)?;
    let state = run(a, &fact, y, params)?;
    Ok(RecoverySolution::unpack(a, y, params, &state))
}

pub(crate) fn run(
    a: &AugmentedMatrix,
    fact: &NormalFactorization,
    y: &DVector<f64>,
    params: &SolverParams,
) -> Result<(SolverState, bool)> {
    let mut st = SolverState::initial(a, y, params);
    let mut ws = fact.workspace(a);
    let mut rw = DVector::zeros(a.total_cols());
    let mut rv = DVector::zeros(a.rows());
    let mut converged = false;

    while st.iter < params.max_iters {
        st.iter += 1;
        // reflected g1 step: r = 2 p - z
        rw.copy_from(&st.w);
        rw.axpy(-1.0, &st.w_tilde, 2.0);
        rv.copy_from(&st.v);
        rv.axpy(-1.0, &st.v_tilde, 2.0);
        fact.project_graph(a, &mut rw, &mut rv, &mut ws);
        // z <- z + prox_g2(r) - p
        st.w_tilde += &rw;
        st.w_tilde -= &st.w;
        st.v_tilde += &rv;
        st.v_tilde -= &st.v;

        // shadow step p2 - p1 is the fixed-point residual
        rw -= &st.w;
        rv -= &st.v;
        let step = (rw.norm_squared() + rv.norm_squared()).sqrt();
        let scale = (st.w_tilde.norm_squared() + st.v_tilde.norm_squared()).sqrt();

        st.w.copy_from(&st.w_tilde);
        shrink_in_place(&mut st.w, params.gamma);
        st.v.copy_from(&st.v_tilde);
        project_ball_in_place(&mut st.v, y, params.sigma);

        if !step.is_finite() || !scale.is_finite() {
            return Err(Error::NonFinite { iteration: st.iter });
        }
        if step / scale.max(1.0) < params.tol {
            converged = true;
            break;
        }
    }
    Ok((st, converged))
}
