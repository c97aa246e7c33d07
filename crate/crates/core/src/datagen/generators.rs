use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{rng_from_seed, SimRng};
use crate::error::{Error, Result};

/// Law of the uncorrupted inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Independent entries, uniform on `[-bound, bound]`.
    Iid { bound: f64 },
    /// Moving average of four i.i.d. uniform `[-1, 1]^d` vectors.
    AlphaMixing,
    /// Finite-state uniformly ergodic chain embedded in `[-1, 1]^d`.
    Markov { states: usize },
}

impl Default for Generator {
    fn default() -> Self {
        Generator::AlphaMixing
    }
}

impl Generator {
    pub fn generate(&self, m: usize, d: usize, seed: u64) -> Result<DMatrix<f64>> {
        match *self {
            Generator::Iid { bound } => gen_iid(m, d, bound, seed),
            Generator::AlphaMixing => gen_alpha_mixing(m, d, seed),
            Generator::Markov { states } => gen_markov_chain(m, d, states, seed),
        }
    }

    /// Almost-sure bound on `|x_ij|`.
    pub fn bound(&self) -> f64 {
        match *self {
            Generator::Iid { bound } => bound,
            Generator::AlphaMixing => 15.0 / 16.0,
            Generator::Markov { .. } => 1.0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Generator::Iid { .. } => "iid",
            Generator::AlphaMixing => "alpha_mixing",
            Generator::Markov { .. } => "markov",
        }
    }
}

fn check_shape(m: usize, d: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("m", "need at least one sample"));
    }
    if d == 0 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    Ok(())
}

pub fn gen_iid(m: usize, d: usize, bound: f64, seed: u64) -> Result<DMatrix<f64>> {
    check_shape(m, d)?;
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::param("bound", format!("must be positive, got {bound}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(uniform_matrix(&mut rng, m, d, bound))
}

fn uniform_matrix(rng: &mut SimRng, m: usize, d: usize, bound: f64) -> DMatrix<f64> {
    // row-major draw order so a row is a contiguous block of the stream
    let mut out = DMatrix::zeros(m, d);
    for i in 0..m {
        for j in 0..d {
            out[(i, j)] = rng.random_range(-bound..=bound);
        }
    }
    out
}

const MA_WEIGHTS: [f64; 4] = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0];

/// `x_i = z_i/16 + z_{i+1}/8 + z_{i+2}/4 + z_{i+3}/2` with `z` i.i.d. uniform on `[-1, 1]^d`.
pub fn gen_alpha_mixing(m: usize, d: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_shape(m, d)?;
    let mut rng = rng_from_seed(seed);
    let z = uniform_matrix(&mut rng, m + 3, d, 1.0);
    Ok(DMatrix::from_fn(m, d, |i, j| {
        MA_WEIGHTS
            .iter()
            .enumerate()
            .map(|(k, w)| w * z[(i + k, j)])
            .sum()
    }))
}

/// A finite-state chain with strictly positive transitions, so the whole
/// state space is a small set with `k0 = 1`.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    transition: DMatrix<f64>,
    stationary: Vec<f64>,
    points: DMatrix<f64>,
}

const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITERS: usize = 100_000;

impl MarkovChain {
    pub fn random(n_states: usize, d: usize, rng: &mut SimRng) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::param("n_states", "need at least two states"));
        }
        let mut transition = DMatrix::from_fn(n_states, n_states, |_, _| rng.random_range(0.05..1.0));
        for mut row in transition.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        let points = uniform_matrix(rng, n_states, d, 1.0);
        let stationary = stationary_distribution(&transition)?;
        Ok(MarkovChain {
            transition,
            stationary,
            points,
        })
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Minorization constant for `P(x, .) >= lambda * uniform(.)`.
    pub fn doeblin_constant(&self) -> f64 {
        self.transition.nrows() as f64 * self.transition.min()
    }

    /// Runs the chain from its stationary law and returns the visited states.
    pub fn simulate_states(&self, m: usize, rng: &mut SimRng) -> Vec<usize> {
        let mut states = Vec::with_capacity(m);
        let mut s = sample_discrete(rng, self.stationary.iter().copied());
        for _ in 0..m {
            states.push(s);
            s = sample_discrete(rng, self.transition.row(s).iter().copied());
        }
        states
    }

    pub fn simulate(&self, m: usize, rng: &mut SimRng) -> DMatrix<f64> {
        let states = self.simulate_states(m, rng);
        let d = self.points.ncols();
        DMatrix::from_fn(m, d, |i, j| self.points[(states[i], j)])
    }
}

fn sample_discrete(rng: &mut SimRng, probs: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs.enumerate() {
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Fixed point of `pi = pi P` by power iteration.
pub fn stationary_distribution(transition: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = transition.nrows();
    let mut pi = nalgebra::RowDVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITERS {
        let next = &pi * transition;
        residual = (&next - &pi).abs().sum();
        pi = &next / next.sum();
        if residual <= STATIONARY_TOL {
            return Ok(pi.iter().copied().collect());
        }
    }
    Err(Error::StationaryDistribution { residual })
}

pub fn gen_markov_chain(m: usize, d: usize, n_states: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_shape(m, d)?;
    let mut rng = rng_from_seed(seed);
    let chain = MarkovChain::random(n_states, d, &mut rng)?;
    Ok(chain.simulate(m, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_mean(x: &DMatrix<f64>, j: usize) -> f64 {
        x.column(j).mean()
    }

    fn autocov(x: &[f64], lag: usize) -> f64 {
        let n = x.len() - lag;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        (0..n).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum::<f64>() / n as f64
    }

    #[test]
    fn iid_is_deterministic_and_bounded() {
        let a = gen_iid(3, 2, 1.0, 7).unwrap();
        assert_eq!(a, gen_iid(3, 2, 1.0, 7).unwrap());
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(gen_iid(0, 2, 1.0, 7).is_err());
        assert!(gen_iid(3, 2, 0.0, 7).is_err());
    }

    #[test]
    fn iid_mean_is_near_zero() {
        let a = gen_iid(100_000, 1, 1.0, 11).unwrap();
        assert!(column_mean(&a, 0).abs() < 0.01);
    }

    #[test]
    fn alpha_mixing_bounded() {
        for seed in 0..20 {
            let x = gen_alpha_mixing(500, 3, seed).unwrap();
            assert!(x.amax() <= 15.0 / 16.0);
        }
    }

    #[test]
    fn alpha_mixing_covariance_structure() {
        let x = gen_alpha_mixing(100_000, 1, 5).unwrap();
        let col: Vec<f64> = x.column(0).iter().copied().collect();
        // Var(z) = 1/3 for uniform [-1, 1]; overlapping weights at lag 1
        // are (1/8)(1/16) + (1/4)(1/8) + (1/2)(1/4) = 21/128.
        let lag1_expected = (1.0 / 3.0) * (21.0 / 128.0);
        let lag1 = autocov(&col, 1);
        assert!(lag1 > 0.0);
        assert!((lag1 - lag1_expected).abs() < 0.1 * lag1_expected, "lag1 = {lag1}");
        assert!(autocov(&col, 4).abs() < 0.01);
    }

    #[test]
    fn alpha_mixing_halves_agree() {
        let m = 100_000;
        let x = gen_alpha_mixing(m, 2, 8).unwrap();
        // variance of a half-sample mean of an MA(4) with these weights
        let sum_w: f64 = MA_WEIGHTS.iter().sum();
        let long_run_var = sum_w * sum_w / 3.0;
        let sd = (2.0 * long_run_var / (m as f64 / 2.0)).sqrt();
        for j in 0..2 {
            let a = x.rows(0, m / 2).column(j).mean();
            let b = x.rows(m / 2, m / 2).column(j).mean();
            assert!((a - b).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn markov_chain_properties() {
        let mut rng = rng_from_seed(3);
        let chain = MarkovChain::random(6, 2, &mut rng).unwrap();
        for row in chain.transition().row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        assert!(chain.transition().min() > 0.0);
        let lambda = chain.doeblin_constant();
        assert!(lambda > 0.0 && lambda <= 1.0);
        // P(x, A) >= lambda * |A| / n for every row and singleton A
        let n = chain.transition().nrows() as f64;
        assert!(chain.transition().iter().all(|&p| p >= lambda / n - 1e-15));

        let states = chain.simulate_states(100_000, &mut rng);
        let mut freq = vec![0.0; 6];
        for s in states {
            freq[s] += 1.0 / 100_000.0;
        }
        let tv: f64 = freq
            .iter()
            .zip(chain.stationary())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "tv = {tv}");
    }

    #[test]
    fn markov_rejects_single_state() {
        assert!(gen_markov_chain(10, 2, 1, 0).is_err());
        let x = gen_markov_chain(10, 2, 4, 0).unwrap();
        assert_eq!(x, gen_markov_chain(10, 2, 4, 0).unwrap());
    }

    #[test]
    fn stationary_failure_is_reported() {
        // period-2 chain whose stationary law is not uniform: power iteration oscillates
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.5, 0.0, 0.5, 0.0, 1.0, 0.0]);
        assert!(matches!(
            stationary_distribution(&p),
            Err(Error::StationaryDistribution { .. })
        ));
    }
}
