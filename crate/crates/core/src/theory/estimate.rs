use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::datagen::{child_seed, rng_from_seed, Generator};
use crate::dictionary::build_dictionary;
use crate::error::{Error, Result};

/// Source of sample points for [`estimate_d`].
pub trait PointSampler {
    /// `n x d` matrix of draws.
    fn sample(&self, n: usize, d: usize, seed: u64) -> Result<DMatrix<f64>>;
}

impl PointSampler for Generator {
    fn sample(&self, n: usize, d: usize, seed: u64) -> Result<DMatrix<f64>> {
        self.generate(n, d, seed)
    }
}

impl<F> PointSampler for F
where
    F: Fn(usize, usize, u64) -> Result<DMatrix<f64>>,
{
    fn sample(&self, n: usize, d: usize, seed: u64) -> Result<DMatrix<f64>> {
        self(n, d, seed)
    }
}

/// Mean of `|a_k + t g_k|` minimized over `t` in `[0, 1]`.
///
/// The objective is convex piecewise linear with kinks at `-a_k / g_k`, so the
/// minimizer is a weighted median of the kinks with weights `|g_k|`.
fn segment_minimum(a: &[f64], g: &[f64]) -> f64 {
    let mut kinks: Vec<(f64, f64)> = a
        .iter()
        .zip(g)
        .filter(|(_, &gk)| gk != 0.0)
        .map(|(&ak, &gk)| (-ak / gk, gk.abs()))
        .collect();
    let mut t = 0.0;
    if !kinks.is_empty() {
        kinks.sort_by(|x, y| x.0.total_cmp(&y.0));
        let half = kinks.iter().map(|k| k.1).sum::<f64>() / 2.0;
        let mut acc = 0.0;
        for &(pos, w) in &kinks {
            acc += w;
            if acc >= half {
                t = pos;
                break;
            }
        }
    }
    let t = t.clamp(0.0, 1.0);
    a.iter().zip(g).map(|(&ak, &gk)| (ak + t * gk).abs()).sum::<f64>() / a.len() as f64
}

/// Monte Carlo estimate of `D = inf_{||c||_1 = 1} E |sum_a c_a x^a|`.
///
/// The expectation is replaced by the mean over `n_samples` draws and the
/// infimum by a minimum over: `n_directions` random directions on the unit
/// `l1` sphere, every coordinate direction, and every edge of the `l1` sphere
/// between two coordinate directions (minimized exactly). The result is an
/// upper estimate of the true infimum for the sampled law.
pub fn estimate_d(
    sampler: &impl PointSampler,
    d: usize,
    p: u32,
    n_directions: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_directions == 0 {
        return Err(Error::param("n_directions", "must be at least 1"));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let x = sampler.sample(n_samples, d, child_seed(seed, 0))?;
    if x.shape() != (n_samples, d) {
        return Err(Error::DimensionMismatch { context: "sampler output rows", expected: n_samples, actual: x.nrows() });
    }
    let phi = build_dictionary(&x, p)?;
    let values = phi.values();
    let r = values.ncols();
    let mean_abs = |v: &DVector<f64>| v.lp_norm(1) / n_samples as f64;

    let mut best = f64::INFINITY;
    let mut rng = rng_from_seed(child_seed(seed, 1));
    for _ in 0..n_directions {
        let mut c = DVector::from_fn(r, |_, _| {
            let e: f64 = rng.sample(Exp1);
            if rng.random::<bool>() { e } else { -e }
        });
        let norm = c.lp_norm(1);
        if norm > 0.0 {
            c /= norm;
            best = best.min(mean_abs(&(values * c)));
        }
    }
    let cols: Vec<Vec<f64>> = (0..r).map(|j| values.column(j).iter().copied().collect()).collect();
    for j in 0..r {
        best = best.min(cols[j].iter().map(|v| v.abs()).sum::<f64>() / n_samples as f64);
    }
    let mut g = vec![0.0; n_samples];
    for i in 0..r {
        for j in i + 1..r {
            for sign in [1.0, -1.0] {
                // c = (1 - t) e_i + sign t e_j.
                for k in 0..n_samples {
                    g[k] = sign * cols[j][k] - cols[i][k];
                }
                best = best.min(segment_minimum(&cols[i], &g));
            }
        }
    }
    Ok(best)
}
