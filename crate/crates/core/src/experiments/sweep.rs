use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{child_seed, GroundTruthPolynomial, Term};
use crate::dictionary::MultiIndex;
use crate::error::{Error, Result};
use crate::experiments::trial::{run_trial, TrialConfig, TrialResult};
use crate::fmt_float;

/// Header of every report CSV.
pub const REPORT_HEADER: &str =
    "axis_name,axis_value,n_trials,success_c,success_e,success_joint,mean_l1_error,mean_iters,wall_ms";

/// Configuration field varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    /// Number of samples.
    M,
    /// Number of corrupted rows.
    STheta,
    /// Corruption magnitude `H`.
    Magnitude,
    /// Model mismatch amplitude.
    Epsilon,
    /// Corruption weight in the objective.
    Lambda,
    /// Replaces the truth by `-1 - 2 x1^v`.
    X1Power,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::M => "m",
            AxisParam::STheta => "s_theta",
            AxisParam::Magnitude => "magnitude",
            AxisParam::Epsilon => "epsilon",
            AxisParam::Lambda => "lambda",
            AxisParam::X1Power => "x1_power",
        }
    }

    fn count(self, v: f64) -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && v < 1e12 {
            Ok(v as usize)
        } else {
            Err(Error::param("axis", format!("{} needs a non-negative integer value, got {v}", self.name())))
        }
    }

    /// `base` with this field set to `v`.
    pub fn apply(self, base: &TrialConfig, v: f64) -> Result<TrialConfig> {
        let mut cfg = base.clone();
        match self {
            AxisParam::M => cfg.m = self.count(v)?,
            AxisParam::STheta => cfg.corruption.sparsity = self.count(v)?,
            AxisParam::Magnitude => cfg.corruption.magnitude = v,
            AxisParam::Epsilon => cfg.mismatch_epsilon = v,
            AxisParam::Lambda => cfg.solver.lambda = v,
            AxisParam::X1Power => {
                let k = self.count(v)? as u32;
                let mut e = vec![0; cfg.d];
                if let Some(first) = e.first_mut() {
                    *first = k;
                }
                cfg.truth = GroundTruthPolynomial::new(
                    cfg.d,
                    k,
                    vec![
                        Term { exponents: MultiIndex::zeros(cfg.d), coefficient: -1.0 },
                        Term { exponents: MultiIndex::new(e), coefficient: -2.0 },
                    ],
                )?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisParam,
    pub values: Vec<f64>,
}

/// Which success flag counts as "recovered" for plots and error averages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessMetric {
    #[default]
    Joint,
    Coefficients,
}

impl SuccessMetric {
    pub fn of(self, r: &TrialResult) -> bool {
        match self {
            SuccessMetric::Joint => r.success_joint,
            SuccessMetric::Coefficients => r.success_c,
        }
    }
}

fn default_trials() -> usize {
    100
}

fn default_label() -> String {
    "sweep".into()
}

/// One curve: a base configuration varied along one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_label")]
    pub label: String,
    pub base: TrialConfig,
    pub axis: Axis,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub metric: SuccessMetric,
}

/// Aggregate over the trials of one axis value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub axis_value: f64,
    pub n_trials: usize,
    pub successes_c: usize,
    pub successes_e: usize,
    pub successes_joint: usize,
    pub n_converged: usize,
    /// Mean `l1` coefficient error over trials successful under the sweep metric; NaN if none.
    pub mean_l1_error: f64,
    pub mean_iters: f64,
    /// Summed per-trial wall time; zero unless timing was requested.
    pub wall_ms: u64,
}

impl CellSummary {
    fn rate(&self, k: usize) -> f64 {
        k as f64 / self.n_trials as f64
    }

    pub fn rate_c(&self) -> f64 {
        self.rate(self.successes_c)
    }

    pub fn rate_e(&self) -> f64 {
        self.rate(self.successes_e)
    }

    pub fn rate_joint(&self) -> f64 {
        self.rate(self.successes_joint)
    }

    pub fn rate_for(&self, metric: SuccessMetric) -> f64 {
        match metric {
            SuccessMetric::Joint => self.rate_joint(),
            SuccessMetric::Coefficients => self.rate_c(),
        }
    }

    fn from_trials(axis_value: f64, trials: &[(TrialResult, u64)], metric: SuccessMetric) -> Self {
        let n = trials.len();
        let count = |f: &dyn Fn(&TrialResult) -> bool| trials.iter().filter(|(r, _)| f(r)).count();
        let good: Vec<f64> = trials.iter().filter(|(r, _)| metric.of(r)).map(|(r, _)| r.l1_error_c).collect();
        CellSummary {
            axis_value,
            n_trials: n,
            successes_c: count(&|r| r.success_c),
            successes_e: count(&|r| r.success_e),
            successes_joint: count(&|r| r.success_joint),
            n_converged: count(&|r| r.converged),
            mean_l1_error: if good.is_empty() { f64::NAN } else { good.iter().sum::<f64>() / good.len() as f64 },
            mean_iters: trials.iter().map(|(r, _)| r.iters as f64).sum::<f64>() / n as f64,
            wall_ms: trials.iter().map(|(_, ms)| ms).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub label: String,
    pub axis_name: AxisParam,
    pub metric: SuccessMetric,
    pub cells: Vec<CellSummary>,
}

impl SweepReport {
    /// Writes the report CSV with `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.axis_name.name(),
                fmt_float(c.axis_value),
                c.n_trials,
                fmt_float(c.rate_c()),
                fmt_float(c.rate_e()),
                fmt_float(c.rate_joint()),
                fmt_float(c.mean_l1_error),
                fmt_float(c.mean_iters),
                c.wall_ms
            )?;
        }
        Ok(())
    }

    /// Writes `x,y` pairs of axis value and success rate under the sweep metric.
    pub fn write_plot<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y")?;
        for c in &self.cells {
            writeln!(out, "{},{}", fmt_float(c.axis_value), fmt_float(c.rate_for(self.metric)))?;
        }
        Ok(())
    }

    pub fn cell(&self, axis_value: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.axis_value == axis_value)
    }
}

/// Runs `n_trials` per axis value. Trial `t` of every cell uses seed
/// `child_seed(master_seed, t)`, so cells share their random draws. The result
/// does not depend on thread count or scheduling.
pub fn run_sweep(spec: &SweepSpec, timing: bool) -> Result<SweepReport> {
    if spec.n_trials == 0 {
        return Err(Error::param("n_trials", "must be at least 1"));
    }
    if spec.axis.values.is_empty() {
        return Err(Error::param("axis", "needs at least one value"));
    }
    let configs: Vec<TrialConfig> =
        spec.axis.values.iter().map(|&v| spec.axis.name.apply(&spec.base, v)).collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> =
        (0..configs.len()).flat_map(|i| (0..spec.n_trials).map(move |t| (i, t))).collect();
    let results: Vec<(TrialResult, u64)> = tasks
        .par_iter()
        .map(|&(i, t)| {
            let mut cfg = configs[i].clone();
            cfg.seed = child_seed(spec.master_seed, t as u64);
            let start = Instant::now();
            let r = run_trial(&cfg)?;
            let ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
            Ok((r, ms))
        })
        .collect::<Result<_>>()?;
    let cells = results
        .chunks(spec.n_trials)
        .zip(&spec.axis.values)
        .map(|(chunk, &v)| CellSummary::from_trials(v, chunk, spec.metric))
        .collect();
    Ok(SweepReport { label: spec.label.clone(), axis_name: spec.axis.name, metric: spec.metric, cells })
}

/// Several sweeps reported together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub series: Vec<SweepReport>,
}

impl ExperimentReport {
    pub fn series(&self, label: &str) -> Option<&SweepReport> {
        self.series.iter().find(|s| s.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{CorruptionSpec, Generator};
    use crate::solver::SolverParams;

    fn spec(values: Vec<f64>, n_trials: usize) -> SweepSpec {
        SweepSpec {
            label: "t".into(),
            base: TrialConfig {
                d: 2,
                p: 2,
                truth: GroundTruthPolynomial::from_pairs(2, 2, &[(&[0, 0], 1.0), (&[1, 1], -1.5)]).unwrap(),
                m: 30,
                generator: Generator::AlphaMixing,
                corruption: CorruptionSpec { sparsity: 2, ..Default::default() },
                mismatch_epsilon: 0.0,
                solver: SolverParams::default(),
                normalize: true,
                seed: 0,
            },
            axis: Axis { name: AxisParam::M, values },
            n_trials,
            master_seed: 9,
            metric: SuccessMetric::Joint,
        }
    }

    #[test]
    fn single_trial_rates_are_binary() {
        let rep = run_sweep(&spec(vec![8.0, 20.0, 40.0], 1), false).unwrap();
        for c in &rep.cells {
            for r in [c.rate_c(), c.rate_e(), c.rate_joint()] {
                assert!(r == 0.0 || r == 1.0);
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let s = spec(vec![10.0, 20.0], 6);
        let a = run_sweep(&s, false).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_sweep(&s, false)).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
        assert!(String::from_utf8(x).unwrap().starts_with(REPORT_HEADER));
    }

    #[test]
    fn rates_are_exact_fractions() {
        let rep = run_sweep(&spec(vec![12.0], 7), false).unwrap();
        let c = &rep.cells[0];
        assert_eq!(c.rate_joint(), c.successes_joint as f64 / 7.0);
        assert!(c.successes_joint <= c.successes_c);
    }

    #[test]
    fn axis_application() {
        let base = spec(vec![1.0], 1).base;
        assert_eq!(AxisParam::STheta.apply(&base, 3.0).unwrap().corruption.sparsity, 3);
        assert!(AxisParam::STheta.apply(&base, 2.5).is_err());
        assert!(AxisParam::STheta.apply(&base, 31.0).is_err());
        assert_eq!(AxisParam::Lambda.apply(&base, 2.0).unwrap().solver.lambda, 2.0);
        let t = AxisParam::X1Power.apply(&base, 2.0).unwrap().truth;
        assert_eq!(t.sparsity(), 2);
        assert!(AxisParam::X1Power.apply(&base, 3.0).is_err());
        assert!(AxisParam::Magnitude.apply(&base, -1.0).is_err());
    }

    #[test]
    fn plot_data_format() {
        let rep = SweepReport {
            label: "x".into(),
            axis_name: AxisParam::M,
            metric: SuccessMetric::Coefficients,
            cells: vec![CellSummary {
                axis_value: 50.0,
                n_trials: 4,
                successes_c: 3,
                successes_e: 1,
                successes_joint: 1,
                n_converged: 4,
                mean_l1_error: 0.5,
                mean_iters: 10.0,
                wall_ms: 0,
            }],
        };
        let mut out = Vec::new();
        rep.write_plot(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y\n50,0.75\n");
        let mut out = Vec::new();
        rep.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().nth(1).unwrap(), "m,50,4,0.75,0.25,0.25,0.5,10,0");
    }
}
