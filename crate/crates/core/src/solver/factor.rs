//! Reusable solver for `(I + A^T A) x = b` with `A = [lambda^-1 I_m, Phi]`.
//!
//! By Woodbury, `(I + A^T A)^{-1} = I - A^T M^{-1} A` with
//! `M = I_m + A A^T = (1 + lambda^-2) I_m + Phi Phi^T`. When `m > r` the
//! `m x m` system is reduced once more to `K = (1 + lambda^-2) I_r + Phi^T Phi`.
//! Either way only a `min(m, r)` square matrix is factored.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dictionary::AugmentedMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducedSide {
    /// Factor the `m x m` matrix `M`.
    Rows,
    /// Factor the `r x r` matrix `K`.
    Cols,
}

#[derive(Clone, Debug)]
pub struct NormalFactorization {
    side: ReducedSide,
    shift: f64,
    chol: Cholesky<f64, Dyn>,
    m: usize,
    r: usize,
}

/// Scratch buffers for [`NormalFactorization::project_graph`].
#[derive(Clone, Debug)]
pub(crate) struct GraphWorkspace {
    q: DVector<f64>,
    g: DVector<f64>,
}

impl NormalFactorization {
    pub fn new(a: &AugmentedMatrix) -> Result<Self> {
        let phi = a.phi().values();
        let (m, r) = phi.shape();
        let shift = 1.0 + 1.0 / (a.lambda() * a.lambda());
        let (side, mut mat) = if m <= r {
            (ReducedSide::Rows, phi * phi.transpose())
        } else {
            (ReducedSide::Cols, phi.transpose() * phi)
        };
        for i in 0..mat.nrows() {
            mat[(i, i)] += shift;
        }
        let condition = diagonal_ratio(&mat);
        let chol = Cholesky::new(mat).ok_or(Error::Factorization { condition })?;
        Ok(NormalFactorization {
            side,
            shift,
            chol,
            m,
            r,
        })
    }

    pub fn side(&self) -> ReducedSide {
        self.side
    }

    pub(crate) fn workspace(&self, _a: &AugmentedMatrix) -> GraphWorkspace {
        GraphWorkspace {
            q: DVector::zeros(self.m),
            g: DVector::zeros(self.r),
        }
    }

    /// Solves `(I + A^T A) x = b`.
    pub fn solve(&self, a: &AugmentedMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.m + self.r {
            return Err(Error::DimensionMismatch {
                context: "normal solve",
                expected: self.m + self.r,
                actual: b.len(),
            });
        }
        // x = b - A^T M^{-1} A b, which is the graph projection of (b, 0)
        // followed by reading off w'.
        let mut w = b.clone();
        let mut v = DVector::zeros(self.m);
        let mut ws = self.workspace(a);
        self.project_graph(a, &mut w, &mut v, &mut ws);
        Ok(w)
    }

    /// Overwrites `(w, v)` with its projection onto `{v = A w}`.
    ///
    /// With `q = A w - v` and `s = M^{-1} q`, the projection is
    /// `w' = w - A^T s`, `v' = v + s`.
    pub(crate) fn project_graph(
        &self,
        a: &AugmentedMatrix,
        w: &mut DVector<f64>,
        v: &mut DVector<f64>,
        ws: &mut GraphWorkspace,
    ) {
        let phi = a.phi().values();
        let (m, r) = (self.m, self.r);
        let inv_lambda = 1.0 / a.lambda();

        // q = lambda^-1 w_e + Phi w_c - v
        ws.q.gemv(1.0, phi, &w.rows(m, r), 0.0);
        ws.q.axpy(inv_lambda, &w.rows(0, m), 1.0);
        ws.q.axpy(-1.0, v, 1.0);

        match self.side {
            ReducedSide::Rows => {
                // q <- s = M^{-1} q ; g = Phi^T s
                self.chol.solve_mut(&mut ws.q);
                ws.g.gemv_tr(1.0, phi, &ws.q, 0.0);
            }
            ReducedSide::Cols => {
                // g = K^{-1} Phi^T q ; s = (q - Phi g) / shift ; Phi^T s = g
                ws.g.gemv_tr(1.0, phi, &ws.q, 0.0);
                self.chol.solve_mut(&mut ws.g);
                ws.q.gemv(-1.0 / self.shift, phi, &ws.g, 1.0 / self.shift);
            }
        }
        w.rows_mut(0, m).axpy(-inv_lambda, &ws.q, 1.0);
        w.rows_mut(m, r).axpy(-1.0, &ws.g, 1.0);
        *v += &ws.q;
    }
}

fn diagonal_ratio(mat: &DMatrix<f64>) -> f64 {
    let diag = mat.diagonal();
    let max = diag.iter().cloned().fold(f64::MIN, f64::max);
    let min = diag.iter().cloned().fold(f64::MAX, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

pub fn precompute_normal_factorization(a: &AugmentedMatrix) -> Result<NormalFactorization> {
    NormalFactorization::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_dictionary, DesignMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_a(m: usize, d: usize, p: u32, lambda: f64, seed: u64) -> AugmentedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
        AugmentedMatrix::new(build_dictionary(&u, p).unwrap(), lambda).unwrap()
    }

    fn normal_residual(a: &AugmentedMatrix, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let ax = a.apply(x).unwrap();
        let lhs = x + a.apply_transpose(&ax).unwrap();
        (lhs - b).amax()
    }

    #[test]
    fn zero_rhs() {
        let a = random_a(5, 2, 2, 1.0, 0);
        let f = NormalFactorization::new(&a).unwrap();
        assert_eq!(f.solve(&a, &DVector::zeros(11)).unwrap(), DVector::zeros(11));
    }

    #[test]
    fn residual_small_on_both_sides() {
        // m <= r uses M, m > r uses K
        for (m, d, p, side) in [(8, 2, 3, ReducedSide::Rows), (40, 2, 2, ReducedSide::Cols)] {
            for lambda in [0.5, 1.0, 3.0] {
                let a = random_a(m, d, p, lambda, m as u64);
                let f = NormalFactorization::new(&a).unwrap();
                assert_eq!(f.side(), side);
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                for _ in 0..5 {
                    let b = DVector::from_fn(a.total_cols(), |_, _| rng.random_range(-5.0..5.0));
                    let x = f.solve(&a, &b).unwrap();
                    assert!(normal_residual(&a, &x, &b) <= 1e-10 * b.amax());
                }
            }
        }
    }

    #[test]
    fn eigen_directions_scale_by_inverse() {
        // Phi with orthonormal columns (6 x 4), lambda = 1
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let raw = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        let q = raw.qr().q();
        let phi = DesignMatrix::from_parts(q, 3, 1).unwrap();
        let a = AugmentedMatrix::new(phi, 1.0).unwrap();
        let f = NormalFactorization::new(&a).unwrap();

        let dense = a.to_dense();
        let ata = dense.transpose() * &dense;
        let eig = ata.clone().symmetric_eigen();
        for k in 0..eig.eigenvalues.len() {
            let vec = eig.eigenvectors.column(k).into_owned();
            let x = f.solve(&a, &vec).unwrap();
            let expected = &vec / (1.0 + eig.eigenvalues[k]);
            assert!((x - expected).amax() < 1e-12);
        }
        // orthonormal columns: A^T A has eigenvalues {0, 1, 2}
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[..4].iter().all(|e| e.abs() < 1e-12));
        assert!(ev[4..6].iter().all(|e| (e - 1.0).abs() < 1e-12));
        assert!(ev[6..].iter().all(|e| (e - 2.0).abs() < 1e-12));
    }
}
