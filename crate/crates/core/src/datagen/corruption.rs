use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::rng_from_seed;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionTarget {
    /// Perturb the input rows: `u_i = x_i + theta_i`.
    Inputs,
    /// Perturb the outputs: `y_i += e_i`.
    #[default]
    Outputs,
}

/// Row-sparse corruption with entries uniform on `[-magnitude, magnitude]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub sparsity: usize,
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
    #[serde(default)]
    pub target: CorruptionTarget,
}

fn default_magnitude() -> f64 {
    2.0
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        CorruptionSpec {
            sparsity: 0,
            magnitude: default_magnitude(),
            target: CorruptionTarget::Outputs,
        }
    }
}

impl CorruptionSpec {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.sparsity > m {
            return Err(Error::param(
                "sparsity",
                format!("corruption sparsity {} exceeds m = {m}", self.sparsity),
            ));
        }
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return Err(Error::param("magnitude", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Corruption {
    /// Corrupted inputs `x + theta`.
    pub u: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    /// Additive output corruption; all zero for input corruption.
    pub output_shift: DVector<f64>,
    /// Corrupted rows, ascending.
    pub support: Vec<usize>,
}

pub fn inject_corruption(x: &DMatrix<f64>, spec: &CorruptionSpec, seed: u64) -> Result<Corruption> {
    let (m, d) = x.shape();
    spec.validate(m)?;
    let mut rng = rng_from_seed(seed);
    let mut support = rand::seq::index::sample(&mut rng, m, spec.sparsity).into_vec();
    support.sort_unstable();

    let h = spec.magnitude;
    let mut theta = DMatrix::zeros(m, d);
    let mut output_shift = DVector::zeros(m);
    for &i in &support {
        match spec.target {
            CorruptionTarget::Inputs => {
                for j in 0..d {
                    theta[(i, j)] = rng.random_range(-h..=h);
                }
            }
            CorruptionTarget::Outputs => output_shift[i] = rng.random_range(-h..=h),
        }
    }
    Ok(Corruption {
        u: x + &theta,
        theta,
        output_shift,
        support,
    })
}
