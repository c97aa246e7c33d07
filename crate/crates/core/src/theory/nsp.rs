use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::theory::simplex::{simplex_lp, LpStatus};

/// Maximum number of LPs `nsp_check` will schedule.
pub const NSP_LP_BUDGET: f64 = 1e6;
/// Singular values below this fraction of the largest span the kernel.
pub const KERNEL_RTOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NspReport {
    pub order_s: usize,
    /// `max ||v_S||_1` over `|S| <= s` and kernel vectors with `||v||_1 <= 1`.
    pub alpha_max: f64,
    /// Column indices attaining `alpha_max` (empty for a trivial kernel).
    pub worst_set: Vec<usize>,
    pub nsp_holds: bool,
    /// `alpha_max / (1 - alpha_max)`; infinite when `alpha_max = 1`, written as `null` in JSON.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub rho: f64,
}

fn ser_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl NspReport {
    fn from_alpha(order_s: usize, alpha: f64, worst_set: Vec<usize>) -> Self {
        let alpha_max = alpha.clamp(0.0, 1.0);
        let rho = if alpha_max < 1.0 { alpha_max / (1.0 - alpha_max) } else { f64::INFINITY };
        NspReport { order_s, alpha_max, worst_set, nsp_holds: alpha_max < 0.5, rho }
    }

    /// Error amplification `2 (1 + rho) / (1 - rho)` of the stable recovery bound.
    pub fn stability_factor(&self) -> f64 {
        if self.rho < 1.0 {
            2.0 * (1.0 + self.rho) / (1.0 - self.rho)
        } else {
            f64::INFINITY
        }
    }
}

/// Orthonormal basis of `ker A` as the columns of an `n x k` matrix.
pub fn kernel_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least n rows so the SVD returns all n right singular vectors.
    let mut padded = DMatrix::zeros(m.max(n), n);
    padded.rows_mut(0, m).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let cut = KERNEL_RTOL * smax;
    let null: Vec<usize> = (0..n).filter(|&i| smax == 0.0 || svd.singular_values[i] <= cut).collect();
    let mut k = DMatrix::zeros(n, null.len());
    for (c, &i) in null.iter().enumerate() {
        k.set_column(c, &v_t.row(i).transpose());
    }
    k
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..s).collect();
    loop {
        out.push(cur.clone());
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - s + i {
                cur[i] += 1;
                for j in i + 1..s {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `max sum_i sign_i (K t)_i over S  s.t.  ||K t||_1 <= 1`.
///
/// Variables `[t+, t-, u]` with `-u <= K t <= u` and `sum u <= 1`.
fn support_lp(kernel: &DMatrix<f64>, set: &[usize], signs: &[f64]) -> Result<f64> {
    let (n, k) = kernel.shape();
    let nv = 2 * k + n;
    let mut c = DVector::zeros(nv);
    for (&i, &sg) in set.iter().zip(signs) {
        for j in 0..k {
            c[j] -= sg * kernel[(i, j)];
            c[k + j] += sg * kernel[(i, j)];
        }
    }
    let mut a = DMatrix::zeros(2 * n + 1, nv);
    for i in 0..n {
        for j in 0..k {
            a[(i, j)] = kernel[(i, j)];
            a[(i, k + j)] = -kernel[(i, j)];
            a[(n + i, j)] = -kernel[(i, j)];
            a[(n + i, k + j)] = kernel[(i, j)];
        }
        a[(i, 2 * k + i)] = -1.0;
        a[(n + i, 2 * k + i)] = -1.0;
        a[(2 * n, 2 * k + i)] = 1.0;
    }
    let mut b = DVector::zeros(2 * n + 1);
    b[2 * n] = 1.0;
    let sol = simplex_lp(&c, &a, &b, &DMatrix::zeros(0, nv), &DVector::zeros(0))?;
    match sol.status {
        LpStatus::Optimal => Ok(-sol.objective),
        status => Err(Error::Lp(format!("support LP returned {status:?}"))),
    }
}

/// Certifies the null space property of order `s` for `a` by exact LPs over
/// every support of size `min(s, n)` and sign pattern.
pub fn nsp_check(a: &DMatrix<f64>, s: usize) -> Result<NspReport> {
    if s == 0 {
        return Err(Error::param("s", "order must be at least 1"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("matrix", "entries must be finite"));
    }
    let n = a.ncols();
    let size = s.min(n);
    let count = binomial(n, size) * 2f64.powi(size as i32);
    if count > NSP_LP_BUDGET {
        return Err(Error::BudgetExceeded { count, budget: NSP_LP_BUDGET });
    }
    let kernel = kernel_basis(a);
    if kernel.ncols() == 0 {
        return Ok(NspReport::from_alpha(s, 0.0, Vec::new()));
    }
    // v and -v are both in the kernel, so the first sign can be fixed to +1.
    let sets = subsets(n, size);
    let patterns: Vec<Vec<f64>> = (0..1usize << size.saturating_sub(1))
        .map(|bits| {
            (0..size).map(|i| if i > 0 && bits >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect()
        })
        .collect();
    let best = sets
        .par_iter()
        .enumerate()
        .map(|(idx, set)| -> Result<(f64, usize)> {
            let mut v = 0.0f64;
            for signs in &patterns {
                v = v.max(support_lp(&kernel, set, signs)?);
            }
            Ok((v, idx))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |x, y| Ok(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
        )?;
    Ok(NspReport::from_alpha(s, best.0, sets[best.1].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_has_trivial_kernel() {
        for s in 1..=2 {
            let r = nsp_check(&DMatrix::identity(2, 2), s).unwrap();
            assert_eq!(r.alpha_max, 0.0);
            assert!(r.nsp_holds);
            assert_eq!(r.rho, 0.0);
        }
    }

    #[test]
    fn two_column_ones() {
        let r = nsp_check(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), 1).unwrap();
        assert!((r.alpha_max - 0.5).abs() < 1e-12);
        assert!(!r.nsp_holds);
        assert!((r.rho - 1.0).abs() < 1e-10);
        assert_eq!(r.worst_set, vec![0]);
    }

    #[test]
    fn kernel_basis_is_orthonormal_null_space() {
        let a = random_matrix(3, 7, 4);
        let k = kernel_basis(&a);
        assert_eq!(k.ncols(), 4);
        assert!((&a * &k).amax() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    /// `max_i |v_i| / ||v||_1` over a fine grid of the unit circle in a 2-dim kernel.
    fn angular_oracle(k: &DMatrix<f64>) -> f64 {
        let steps = 400_000;
        let mut best = 0.0f64;
        for t in 0..steps {
            let th = std::f64::consts::PI * t as f64 / steps as f64;
            let v = k.column(0) * th.cos() + k.column(1) * th.sin();
            best = best.max(v.amax() / v.lp_norm(1));
        }
        best
    }

    #[test]
    fn random_four_by_six_matches_angular_grid() {
        for seed in [1u64, 2, 3] {
            let a = random_matrix(4, 6, seed);
            let k = kernel_basis(&a);
            assert_eq!(k.ncols(), 2);
            let r = nsp_check(&a, 1).unwrap();
            let oracle = angular_oracle(&k);
            assert!((r.alpha_max - oracle).abs() < 1e-4, "seed {seed}: {} vs {oracle}", r.alpha_max);
        }
    }

    #[test]
    fn failure_is_monotone_in_order() {
        let a = random_matrix(4, 7, 11);
        let mut prev_alpha = 0.0;
        let mut failed = false;
        for s in 1..=7 {
            let r = nsp_check(&a, s).unwrap();
            assert!(r.alpha_max >= prev_alpha - 1e-12);
            if failed {
                assert!(!r.nsp_holds, "order {s}");
            }
            failed |= !r.nsp_holds;
            assert_eq!(r.nsp_holds, r.rho < 1.0);
            prev_alpha = r.alpha_max;
        }
        assert!(failed);
        let full = nsp_check(&a, 7).unwrap();
        assert!((full.alpha_max - 1.0).abs() < 1e-9);
        assert!(full.stability_factor().is_infinite());
    }

    #[test]
    fn invariant_under_permutation_and_row_scaling() {
        let a = random_matrix(3, 6, 5);
        let base = nsp_check(&a, 2).unwrap();
        let perm = [3usize, 0, 5, 1, 4, 2];
        let pa = DMatrix::from_fn(3, 6, |i, j| a[(i, perm[j])]);
        let pr = nsp_check(&pa, 2).unwrap();
        assert!((pr.alpha_max - base.alpha_max).abs() < 1e-9);
        let mut mapped: Vec<usize> = pr.worst_set.iter().map(|&j| perm[j]).collect();
        mapped.sort_unstable();
        assert!((nsp_value_for_set(&a, &mapped) - base.alpha_max).abs() < 1e-9);
        let scaled = DMatrix::from_fn(3, 6, |i, j| a[(i, j)] * [2.0, -0.5, 7.0][i]);
        assert!((nsp_check(&scaled, 2).unwrap().alpha_max - base.alpha_max).abs() < 1e-9);
    }

    fn nsp_value_for_set(a: &DMatrix<f64>, set: &[usize]) -> f64 {
        let k = kernel_basis(a);
        let mut best = 0.0f64;
        for bits in 0..1usize << set.len() {
            let signs: Vec<f64> = (0..set.len()).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            best = best.max(support_lp(&k, set, &signs).unwrap());
        }
        best
    }

    #[test]
    fn budget_guard() {
        let a = DMatrix::from_element(1, 40, 1.0);
        assert!(matches!(nsp_check(&a, 10), Err(Error::BudgetExceeded { .. })));
        assert!(nsp_check(&a, 0).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = NspReport::from_alpha(2, 1.0, vec![0, 1]);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"rho\":null"));
        assert_eq!(serde_json::from_str::<NspReport>(&s).unwrap(), r);
    }
}
