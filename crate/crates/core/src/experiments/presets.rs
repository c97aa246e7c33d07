use serde::{Deserialize, Serialize};

use crate::datagen::{CorruptionSpec, CorruptionTarget, Generator, GroundTruthPolynomial};
use crate::dictionary::monomial_count;
use crate::error::{Error, Result};
use crate::experiments::sweep::{run_sweep, Axis, AxisParam, ExperimentReport, SuccessMetric, SweepSpec};
use crate::experiments::trial::TrialConfig;
use crate::solver::SolverParams;

/// Sample grid of the first preset.
pub const PRESET1_M: [f64; 13] = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 80.0, 100.0, 150.0, 200.0];

/// A named group of sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub sweeps: Vec<SweepSpec>,
}

impl Preset {
    /// Runs every sweep in order.
    pub fn run(&self, timing: bool) -> Result<ExperimentReport> {
        let series = self.sweeps.iter().map(|s| run_sweep(s, timing)).collect::<Result<_>>()?;
        Ok(ExperimentReport { name: self.name.clone(), series })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetOptions {
    pub n_trials: usize,
    pub master_seed: u64,
    /// Third preset only: sample 17.5% of the dictionary size instead of 50%.
    pub low_rate: bool,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions { n_trials: 100, master_seed: 0, low_rate: false }
    }
}

/// `round(rate * r)`.
pub fn samples_at_rate(rate: f64, r: usize) -> usize {
    (rate * r as f64).round() as usize
}

fn base(truth: GroundTruthPolynomial, p: u32, m: usize, s_theta: usize, magnitude: f64, lambda: f64) -> TrialConfig {
    TrialConfig {
        d: truth.dim(),
        p,
        truth,
        m,
        generator: Generator::AlphaMixing,
        corruption: CorruptionSpec { sparsity: s_theta, magnitude, target: CorruptionTarget::Outputs },
        mismatch_epsilon: 0.0,
        solver: SolverParams { lambda, ..SolverParams::default() },
        normalize: false,
        seed: 0,
    }
}

fn fmt_label(prefix: &str, v: f64) -> String {
    format!("{prefix}{}", crate::fmt_float(v))
}

/// The four reference experiments.
///
/// 1. `1 - 2 x1 x2 x3 + 5 x1^5`, degree-5 dictionary in 3 variables, one curve
///    per corruption count in {5, 10, 12}, swept over `m`.
/// 2. `-1 - 2 x1^k` for k in {2, 3, 5, 8, 10}, degree-10 dictionary in 3
///    variables, 5 corrupted rows, one curve per sampling rate (15%, 35%).
/// 3. The five-term polynomial in 10 variables, degree-3 dictionary,
///    `lambda = 2`, one curve per magnitude in {0.5, 2, 10}, swept over the
///    corruption count in {3, 10, 15}.
/// 4. `-1 + 2 x1^2 + 0.5 x5 x20`, degree-2 dictionary in 20 variables, 50
///    samples, 3 corrupted rows, swept over the mismatch amplitude; scored on
///    coefficients only.
///
/// Columns are normalized in presets 1 and 2.
pub fn preset_example(n: u32, opts: PresetOptions) -> Result<Preset> {
    let sweep = |label: String, base: TrialConfig, name: AxisParam, values: Vec<f64>, metric: SuccessMetric| SweepSpec {
        label,
        base,
        axis: Axis { name, values },
        n_trials: opts.n_trials,
        master_seed: opts.master_seed,
        metric,
    };
    let sweeps = match n {
        1 => [5usize, 10, 12]
            .iter()
            .map(|&s| {
                let mut b = base(GroundTruthPolynomial::example1(), 5, 56, s, 2.0, 1.0);
                b.normalize = true;
                sweep(format!("s_theta{s}"), b, AxisParam::M, PRESET1_M.to_vec(), SuccessMetric::Joint)
            })
            .collect(),
        2 => {
            let r = monomial_count(3, 10);
            [0.15, 0.35]
                .iter()
                .map(|&rate| {
                    let mut b = base(GroundTruthPolynomial::example2(2), 10, samples_at_rate(rate, r), 5, 2.0, 1.0);
                    b.normalize = true;
                    let label = format!("rate{}", (rate * 100.0).round());
                    sweep(label, b, AxisParam::X1Power, vec![2.0, 3.0, 5.0, 8.0, 10.0], SuccessMetric::Joint)
                })
                .collect()
        }
        3 => {
            let r = monomial_count(10, 3);
            let m = samples_at_rate(if opts.low_rate { 0.175 } else { 0.5 }, r);
            [0.5, 2.0, 10.0]
                .iter()
                .map(|&h| {
                    let b = base(GroundTruthPolynomial::example3(), 3, m, 3, h, 2.0);
                    sweep(fmt_label("H", h), b, AxisParam::STheta, vec![3.0, 10.0, 15.0], SuccessMetric::Joint)
                })
                .collect()
        }
        4 => {
            let m = samples_at_rate(0.217, monomial_count(20, 2));
            let b = base(GroundTruthPolynomial::example4(), 2, m, 3, 2.0, 1.0);
            vec![sweep("mismatch".into(), b, AxisParam::Epsilon, vec![0.0, 1e-5, 1e-4, 1e-3], SuccessMetric::Coefficients)]
        }
        _ => return Err(Error::param("preset", format!("expected 1..=4, got {n}"))),
    };
    Ok(Preset { name: format!("example{n}"), sweeps })
}
