//! Dense two-phase simplex for `min c'x  s.t.  A_ineq x <= b_ineq, A_eq x = b_eq, x >= 0`.
//!
//! Bland's rule is used for both the entering and the leaving variable, so the
//! method terminates on degenerate problems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot, ratio-test and feasibility tolerance.
pub const LP_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal value; `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// Minimizer; empty unless optimal.
    pub x: DVector<f64>,
}

struct Tableau {
    /// Constraint rows followed by the objective row; last column is the rhs.
    t: DMatrix<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs(&self) -> usize {
        self.t.ncols() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        self.t.row_mut(row).scale_mut(1.0 / p);
        let pivot_row = self.t.row(row).clone_owned();
        for i in 0..self.t.nrows() {
            if i != row {
                let f = self.t[(i, col)];
                if f != 0.0 {
                    for j in 0..self.t.ncols() {
                        self.t[(i, j)] -= f * pivot_row[j];
                    }
                }
            }
        }
        self.t[(row, col)] = 1.0;
        self.basis[row] = col;
    }

    /// Runs simplex iterations over columns `< allowed`; returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        let obj = self.rows();
        let rhs = self.rhs();
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..allowed).find(|&j| self.t[(obj, j)] < -LP_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..obj {
                let a = self.t[(i, col)];
                if a > LP_TOL {
                    let ratio = self.t[(i, rhs)] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - LP_TOL
                                || (ratio <= br + LP_TOL && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((row, _)) => self.pivot(row, col),
            }
        }
        Err(Error::Lp(format!("no convergence within {MAX_PIVOTS} pivots")))
    }

    /// Objective row `c_j - c_B' B^-1 A_j` for costs on the first `c.len()` columns.
    fn set_objective(&mut self, c: &[f64]) {
        let obj = self.rows();
        let ncols = self.t.ncols();
        for j in 0..ncols {
            self.t[(obj, j)] = if j < c.len() { c[j] } else { 0.0 };
        }
        for i in 0..obj {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..ncols {
                    self.t[(obj, j)] -= cb * self.t[(i, j)];
                }
            }
        }
    }
}

fn check_block(name: &'static str, a: &DMatrix<f64>, b: &DVector<f64>, n: usize) -> Result<()> {
    if a.nrows() > 0 && a.ncols() != n {
        return Err(Error::DimensionMismatch { context: name, expected: n, actual: a.ncols() });
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { context: name, expected: a.nrows(), actual: b.len() });
    }
    Ok(())
}

/// Solves `min c'x  s.t.  a_ineq x <= b_ineq, a_eq x = b_eq, x >= 0`.
///
/// Either constraint block may have zero rows.
pub fn simplex_lp(
    c: &DVector<f64>,
    a_ineq: &DMatrix<f64>,
    b_ineq: &DVector<f64>,
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
) -> Result<LpSolution> {
    let n = c.len();
    check_block("inequality constraints", a_ineq, b_ineq, n)?;
    check_block("equality constraints", a_eq, b_eq, n)?;
    if c.iter().chain(a_ineq.iter()).chain(b_ineq.iter()).chain(a_eq.iter()).chain(b_eq.iter()).any(|v| !v.is_finite()) {
        return Err(Error::param("lp", "all coefficients must be finite"));
    }
    let k = a_ineq.nrows();
    let rows = k + a_eq.nrows();

    // Columns: x (n), slacks (k), artificials (one per row without a usable slack), rhs.
    let needs_art: Vec<bool> = (0..rows).map(|i| i >= k || b_ineq[i] < 0.0).collect();
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let real = n + k;
    let ncols = real + n_art + 1;
    let mut t = DMatrix::zeros(rows + 1, ncols);
    let mut basis = vec![0; rows];
    let mut art = real;
    for i in 0..rows {
        let (coeffs, b) = if i < k { (a_ineq.row(i), b_ineq[i]) } else { (a_eq.row(i - k), b_eq[i - k]) };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * coeffs[j];
        }
        if i < k {
            t[(i, n + i)] = sign;
        }
        t[(i, ncols - 1)] = sign * b;
        if needs_art[i] {
            t[(i, art)] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { t, basis };

    if n_art > 0 {
        let mut phase1 = vec![0.0; real + n_art];
        phase1[real..].fill(1.0);
        tab.set_objective(&phase1);
        tab.optimize(real + n_art)?;
        let infeasibility = -tab.t[(rows, ncols - 1)];
        let scale = 1.0 + b_ineq.amax().max(b_eq.amax());
        if infeasibility > LP_TOL * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, objective: f64::INFINITY, x: DVector::zeros(0) });
        }
        // Drive zero-valued artificials out where a real column can replace them.
        for i in 0..rows {
            if tab.basis[i] >= real {
                if let Some(j) = (0..real).find(|&j| tab.t[(i, j)].abs() > LP_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    tab.set_objective(c.as_slice());
    if !tab.optimize(real)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, objective: f64::NEG_INFINITY, x: DVector::zeros(0) });
    }
    let mut x = DVector::zeros(n);
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[(i, ncols - 1)].max(0.0);
        }
    }
    Ok(LpSolution { status: LpStatus::Optimal, objective: c.dot(&x), x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn none(n: usize) -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::zeros(0, n), DVector::zeros(0))
    }

    #[test]
    fn single_variable_lower_bound() {
        // x >= 1 written as -x <= -1.
        let (ae, be) = none(1);
        let s = simplex_lp(&DVector::from_vec(vec![1.0]), &DMatrix::from_element(1, 1, -1.0), &DVector::from_vec(vec![-1.0]), &ae, &be).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let (ai, bi) = none(1);
        let s = simplex_lp(&DVector::from_vec(vec![-1.0]), &ai, &bi, &ai, &bi).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        // x <= -1 with x >= 0.
        let s = simplex_lp(&DVector::from_vec(vec![1.0]), &DMatrix::from_element(1, 1, 1.0), &DVector::from_vec(vec![-1.0]), &ai, &bi).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        // x1 + x2 = 1 and x1 + x2 = 2.
        let (ai, bi) = none(2);
        let aeq = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = simplex_lp(&DVector::from_vec(vec![1.0, 1.0]), &ai, &bi, &aeq, &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities() {
        let (ai, bi) = none(3);
        let aeq = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let s = simplex_lp(&DVector::from_vec(vec![3.0, 1.0, 2.0]), &ai, &bi, &aeq, &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let (ae, be) = none(2);
        let r = simplex_lp(&DVector::zeros(2), &DMatrix::zeros(1, 3), &DVector::zeros(1), &ae, &be);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        let r = simplex_lp(&DVector::zeros(2), &DMatrix::zeros(1, 2), &DVector::zeros(2), &ae, &be);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let c = DVector::from_vec(vec![-0.75, 150.0, -0.02, 6.0]);
        let a = DMatrix::from_row_slice(3, 4, &[0.25, -60.0, -0.04, 9.0, 0.5, -90.0, -0.02, 3.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let (ae, be) = none(4);
        let s = simplex_lp(&c, &a, &b, &ae, &be).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-12);
    }

    /// Minimum of `c'x` over all vertices of `{A x <= b, E x = f, x >= 0}`.
    fn vertex_enumeration(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>, e: &DMatrix<f64>, f: &DVector<f64>) -> Option<f64> {
        let n = c.len();
        // Candidate active rows: inequalities, then x_j >= 0 as -x_j <= 0.
        let mut rows: Vec<(Vec<f64>, f64)> = (0..a.nrows()).map(|i| (a.row(i).iter().copied().collect(), b[i])).collect();
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push((r, 0.0));
        }
        let free = n - e.nrows();
        let mut best: Option<f64> = None;
        let total = rows.len();
        let mut pick: Vec<usize> = (0..free).collect();
        loop {
            let mut sys = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for i in 0..e.nrows() {
                sys.row_mut(i).copy_from(&e.row(i));
                rhs[i] = f[i];
            }
            for (k, &idx) in pick.iter().enumerate() {
                for j in 0..n {
                    sys[(e.nrows() + k, j)] = rows[idx].0[j];
                }
                rhs[e.nrows() + k] = rows[idx].1;
            }
            let lu = sys.clone().full_piv_lu();
            if lu.determinant().abs() > 1e-10 {
                let x = lu.solve(&rhs).unwrap();
                let ok = x.iter().all(|&v| v >= -1e-9) && (0..a.nrows()).all(|i| a.row(i).dot(&x.transpose()) <= b[i] + 1e-9);
                if ok {
                    let v = c.dot(&x);
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
            // Next combination.
            let mut i = free;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if pick[i] < total - free + i {
                    pick[i] += 1;
                    for j in i + 1..free {
                        pick[j] = pick[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for trial in 0..300 {
            let n = rng.random_range(2..=5);
            let k = rng.random_range(1..=4);
            let n_eq = if trial % 3 == 0 { 1 } else { 0 };
            let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            // Box rows keep the polytope bounded.
            let mut a = DMatrix::zeros(k + n, n);
            let mut b = DVector::zeros(k + n);
            for i in 0..k {
                for j in 0..n {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
                b[i] = rng.random_range(-0.5..2.0);
            }
            for j in 0..n {
                a[(k + j, j)] = 1.0;
                b[k + j] = rng.random_range(1.0..3.0);
            }
            let e = DMatrix::from_fn(n_eq, n, |_, _| rng.random_range(0.0..1.0));
            let f = DVector::from_fn(n_eq, |_, _| rng.random_range(0.2..1.0));
            let s = simplex_lp(&c, &a, &b, &e, &f).unwrap();
            match vertex_enumeration(&c, &a, &b, &e, &f) {
                Some(v) => {
                    assert_eq!(s.status, LpStatus::Optimal, "trial {trial}");
                    assert!((s.objective - v).abs() <= 1e-9 * (1.0 + v.abs()), "trial {trial}: {} vs {v}", s.objective);
                    checked += 1;
                }
                None => assert_eq!(s.status, LpStatus::Infeasible, "trial {trial}"),
            }
        }
        assert!(checked > 150);
    }
}
