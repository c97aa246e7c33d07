//! Proximal maps of the two halves of the splitting:
//! `g1(w, v) = ||w||_1 + indicator(||v - y|| <= sigma)` and
//! `g2(w, v) = indicator(v = A w)`.

use nalgebra::DVector;

use super::factor::NormalFactorization;
use crate::dictionary::AugmentedMatrix;
use crate::error::{Error, Result};

/// Componentwise soft thresholding `sign(w) * max(|w| - gamma, 0)`.
pub fn shrink(w: &DVector<f64>, gamma: f64) -> DVector<f64> {
    let mut out = w.clone();
    shrink_in_place(&mut out, gamma);
    out
}

pub(crate) fn shrink_in_place(w: &mut DVector<f64>, gamma: f64) {
    for x in w.iter_mut() {
        let mag = x.abs() - gamma;
        *x = if mag > 0.0 { x.signum() * mag } else { 0.0 };
    }
}

/// Euclidean projection of `v` onto the ball of radius `sigma` around `y`.
pub fn project_ball(v: &DVector<f64>, y: &DVector<f64>, sigma: f64) -> DVector<f64> {
    let mut out = v.clone();
    project_ball_in_place(&mut out, y, sigma);
    out
}

pub(crate) fn project_ball_in_place(v: &mut DVector<f64>, y: &DVector<f64>, sigma: f64) {
    let dist = v.metric_distance(y);
    if dist <= sigma {
        return;
    }
    let scale = sigma / dist;
    for (vi, yi) in v.iter_mut().zip(y.iter()) {
        *vi = yi + scale * (*vi - yi);
    }
}

/// `prox_{gamma g1}(w, v) = (shrink(w, gamma), proj_ball(v))`.
pub fn prox_g1(
    w: &DVector<f64>,
    v: &DVector<f64>,
    gamma: f64,
    y: &DVector<f64>,
    sigma: f64,
) -> (DVector<f64>, DVector<f64>) {
    (shrink(w, gamma), project_ball(v, y, sigma))
}

/// Projection onto the graph `{(w, v) : v = A w}`:
/// `w' = (I + A^T A)^{-1} (w + A^T v)`, `v' = A w'`.
pub fn prox_g2(
    w: &DVector<f64>,
    v: &DVector<f64>,
    fact: &NormalFactorization,
    a: &AugmentedMatrix,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if w.len() != a.total_cols() {
        return Err(Error::DimensionMismatch {
            context: "prox_g2 (w)",
            expected: a.total_cols(),
            actual: w.len(),
        });
    }
    if v.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "prox_g2 (v)",
            expected: a.rows(),
            actual: v.len(),
        });
    }
    let mut ws = fact.workspace(a);
    let mut w_out = w.clone();
    let mut v_out = v.clone();
    fact.project_graph(a, &mut w_out, &mut v_out, &mut ws);
    Ok((w_out, v_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::build_dictionary;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shrink_formula() {
        let w = DVector::from_vec(vec![3.0, -0.5, 0.0]);
        assert_eq!(shrink(&w, 1.0).as_slice(), &[2.0, 0.0, 0.0]);
        let w = DVector::from_vec(vec![3.0, -0.5, 1e-300, -7.25]);
        assert_eq!(shrink(&w, 0.0), w);
    }

    #[test]
    fn shrink_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let a = DVector::from_fn(12, |_, _| rng.random_range(-3.0..3.0));
            let b = DVector::from_fn(12, |_, _| rng.random_range(-3.0..3.0));
            let g = rng.random_range(0.0..2.0);
            assert!((shrink(&a, g) - shrink(&b, g)).norm() <= (&a - &b).norm() + 1e-15);
        }
    }

    #[test]
    fn ball_projection() {
        let y = DVector::from_vec(vec![1.0, -2.0]);
        assert_eq!(project_ball(&y, &y, 0.5), y);
        let v = DVector::from_vec(vec![1.0 + 1.2, -2.0 + 1.6]); // distance 2
        let p = project_ball(&v, &y, 1.0);
        assert!(((&p - &y).norm() - 1.0).abs() < 1e-15);
        assert!((&p - DVector::from_vec(vec![1.6, -1.2])).amax() < 1e-15);
        let pp = project_ball(&p, &y, 1.0);
        assert!((&pp - &p).amax() <= 1e-14);
        // sigma = 0 collapses to the center
        assert_eq!(project_ball(&v, &y, 0.0), y);
    }

    #[test]
    fn prox_g1_cases() {
        let y = DVector::from_vec(vec![0.5, 0.5]);
        let (w, v) = prox_g1(&DVector::zeros(2), &y, 1.0, &y, 0.1);
        assert_eq!(w, DVector::zeros(2));
        assert_eq!(v, y);
        let inside = DVector::from_vec(vec![0.55, 0.5]);
        let (w, v) = prox_g1(&DVector::from_vec(vec![2.0, -2.0]), &inside, 1.0, &y, 0.1);
        assert_eq!(w.as_slice(), &[1.0, -1.0]);
        assert_eq!(v, inside);
    }

    fn small_instance(seed: u64) -> AugmentedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = DMatrix::from_fn(6, 1, |_, _| rng.random_range(-1.0..1.0));
        AugmentedMatrix::new(build_dictionary(&u, 3).unwrap(), 1.5).unwrap()
    }

    #[test]
    fn prox_g2_fixes_graph_points() {
        let a = small_instance(2);
        let fact = NormalFactorization::new(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let v = a.apply(&w).unwrap();
        let (w2, v2) = prox_g2(&w, &v, &fact, &a).unwrap();
        assert!((&w2 - &w).amax() < 1e-10);
        assert!((&v2 - &v).amax() < 1e-10);
        assert!(prox_g2(&w, &DVector::zeros(3), &fact, &a).is_err());
    }

    #[test]
    fn prox_g2_matches_dense_least_squares() {
        // minimize ||wbar - w||^2 + ||A wbar - v||^2 via the stacked system [I; A] wbar = [w; v]
        let a = small_instance(4);
        let fact = NormalFactorization::new(&a).unwrap();
        let dense = a.to_dense();
        let n = a.total_cols();
        let mut stacked = DMatrix::zeros(n + 6, n);
        stacked.rows_mut(0, n).fill_with_identity();
        stacked.rows_mut(n, 6).copy_from(&dense);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let w = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let v = DVector::from_fn(6, |_, _| rng.random_range(-2.0..2.0));
            let mut rhs = DVector::zeros(n + 6);
            rhs.rows_mut(0, n).copy_from(&w);
            rhs.rows_mut(n, 6).copy_from(&v);
            let qr = stacked.clone().qr();
            let qtb = qr.q().transpose() * &rhs;
            let wbar = qr.r().solve_upper_triangular(&qtb).unwrap();
            let (w2, v2) = prox_g2(&w, &v, &fact, &a).unwrap();
            assert!((&w2 - &wbar).amax() < 1e-8);
            assert!((&v2 - &dense * &w2).amax() < 1e-10);
        }
    }

    #[test]
    fn prox_g1_matches_grid_search() {
        // one coordinate each for w and v; brute-force the joint 2-d objective
        // 0.5 (w - w0)^2 + gamma |w| + 0.5 (v - v0)^2 over |v - y| <= sigma
        // with a zooming grid (the objective is convex, so zooming is safe)
        let (gamma, y, sigma) = (0.7, 0.3, 0.25);
        for &(w0, v0) in &[(1.3, 1.0), (-0.4, 0.2), (0.2, -0.9), (-2.0, 0.45)] {
            let objective = |w: f64, v: f64| {
                if (v - y).abs() > sigma {
                    return f64::INFINITY;
                }
                0.5 * (w - w0) * (w - w0) + gamma * w.abs() + 0.5 * (v - v0) * (v - v0)
            };
            let (mut cw, mut cv, mut half) = (0.0, y, 3.0);
            let n = 200;
            for _ in 0..8 {
                let mut best = (f64::INFINITY, cw, cv);
                for i in 0..=n {
                    for j in 0..=n {
                        let w = cw - half + 2.0 * half * i as f64 / n as f64;
                        let v = cv - half + 2.0 * half * j as f64 / n as f64;
                        let f = objective(w, v);
                        if f < best.0 {
                            best = (f, w, v);
                        }
                    }
                }
                cw = best.1;
                cv = best.2;
                half *= 0.1;
            }
            let (w, v) = prox_g1(
                &DVector::from_element(1, w0),
                &DVector::from_element(1, v0),
                gamma,
                &DVector::from_element(1, y),
                sigma,
            );
            assert!((w[0] - cw).abs() < 1e-6, "w0={w0}: {} vs {cw}", w[0]);
            assert!((v[0] - cv).abs() < 1e-6, "v0={v0}: {} vs {cv}", v[0]);
        }
    }
}
