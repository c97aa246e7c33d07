use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use robustfit::datagen::{CorruptionTarget, Dataset, Generator};
use robustfit::dictionary::{build_dictionary, normalize_columns};
use robustfit::experiments::{preset_example, run_sweep, PresetOptions, SweepReport, SweepSpec};
use robustfit::solver::{solve, SolverParams};
use robustfit::theory::{
    kappa_condition_sides, lambda_threshold, min_samples_kappa, min_samples_nsp, min_samples_stable_nsp, nsp_check,
};
use robustfit::{Error, KappaSpec, TrialConfig};

use crate::args::{
    BoundsArgs, Command, ExperimentArgs, GenerateArgs, GeneratorArg, NspArgs, RegimeArg, ReproduceArgs, SolveArgs,
    SolverArgs, TargetArg, TrialArgs,
};
use crate::matrix::read_matrix;
use crate::{CliError, CliResult};

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::Bounds(a) => bounds(a),
        Command::Nsp(a) => nsp(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Runs `write` against the file at `path`, or standard output when `None`.
fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?);
            write(&mut w)?;
            w.flush().map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    with_output(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(Error::from)?;
        writeln!(w).map_err(|e| CliError::Runtime(e.to_string()))
    })
}

fn apply_solver(p: &mut SolverParams, a: &SolverArgs) {
    if let Some(v) = a.lambda {
        p.lambda = v;
    }
    if let Some(v) = a.sigma {
        p.sigma = v;
    }
    if let Some(v) = a.gamma {
        p.gamma = v;
    }
    if let Some(v) = a.max_iters {
        p.max_iters = v;
    }
    if let Some(v) = a.tol {
        p.tol = v;
    }
    if let Some(v) = a.support_threshold {
        p.support_threshold = v;
    }
}

fn apply_trial(cfg: &mut TrialConfig, a: &TrialArgs) {
    if let Some(v) = a.m {
        cfg.m = v;
    }
    if let Some(v) = a.s_theta {
        cfg.corruption.sparsity = v;
    }
    if let Some(v) = a.magnitude {
        cfg.corruption.magnitude = v;
    }
    if let Some(t) = a.corrupt {
        cfg.corruption.target = match t {
            TargetArg::Inputs => CorruptionTarget::Inputs,
            TargetArg::Outputs => CorruptionTarget::Outputs,
        };
    }
    if let Some(v) = a.epsilon {
        cfg.mismatch_epsilon = v;
    }
    if let Some(g) = a.generator {
        cfg.generator = match g {
            GeneratorArg::Iid => Generator::Iid { bound: a.bound },
            GeneratorArg::AlphaMixing => Generator::AlphaMixing,
            GeneratorArg::Markov => Generator::Markov { states: a.states },
        };
    }
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let mut cfg = match &a.config {
        Some(path) => read_json::<TrialConfig>(path)?,
        None => preset_example(a.example.unwrap_or(1), PresetOptions::default())?.sweeps[0].base.clone(),
    };
    apply_trial(&mut cfg, &a.trial);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let ds = Dataset::simulate(&cfg.generator, &cfg.truth, cfg.m, &cfg.corruption, cfg.mismatch_epsilon, cfg.seed)?;
    with_output(a.output.as_deref(), |w| Ok(ds.write_csv(w)?))
}

/// Problem description for `solve`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemConfig {
    p: Option<u32>,
    #[serde(default)]
    normalize: bool,
    #[serde(default)]
    solver: SolverParams,
}

fn solve_cmd(a: SolveArgs) -> CliResult<()> {
    let mut problem = match &a.config {
        Some(path) => read_json::<ProblemConfig>(path)?,
        None => ProblemConfig::default(),
    };
    if let Some(p) = a.p {
        problem.p = Some(p);
    }
    if let Some(n) = a.normalize {
        problem.normalize = n;
    }
    apply_solver(&mut problem.solver, &a.solver);
    let p = problem
        .p
        .ok_or_else(|| CliError::Validation("dictionary degree missing: pass `--p` or set `p` in the config".into()))?;
    problem.solver.validate()?;

    let ds = Dataset::read_csv(open(&a.data)?).map_err(|e| match e {
        e if e.is_validation() => CliError::Validation(format!("{}: {e}", a.data.display())),
        e => e.into(),
    })?;
    let mut phi = build_dictionary(&ds.u, p)?;
    if problem.normalize {
        phi = normalize_columns(&phi)?;
    }
    let sol = solve(&phi, &ds.y, &problem.solver)?;
    write_json(a.output.as_deref(), &sol)
}

fn write_series(dir: &Path, series: &SweepReport) -> CliResult<()> {
    let csv = dir.join(format!("{}.csv", series.label));
    let plot = dir.join(format!("{}.dat", series.label));
    with_output(Some(&csv), |w| Ok(series.write_csv(w)?))?;
    with_output(Some(&plot), |w| Ok(series.write_plot(w)?))
}

fn check_label(label: &str) -> CliResult<()> {
    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) || label.starts_with('.') {
        return Err(CliError::Validation(format!(
            "invalid value for `label`: `{label}` must be non-empty and use only letters, digits, `.`, `_`, `-`"
        )));
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CliResult<()> {
    let mut spec: SweepSpec = read_json(&a.config)?;
    check_label(&spec.label)?;
    if let Some(n) = a.trials {
        spec.n_trials = n;
    }
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(n) = a.normalize {
        spec.base.normalize = n;
    }
    if let Some(p) = a.p {
        spec.base.p = p;
    }
    apply_trial(&mut spec.base, &a.trial);
    apply_solver(&mut spec.base.solver, &a.solver);
    let report = run_sweep(&spec, a.timing)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    write_series(&a.out_dir, &report)
}

#[derive(Debug, Serialize)]
struct BoundsOutput {
    regime: &'static str,
    delta: f64,
    r: usize,
    /// Smallest sample size meeting the condition; `null` if none below 1e15.
    m_min: Option<u64>,
    kappa_at_m_min: Option<f64>,
    rhs_at_m_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_at_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhs_at_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_nsp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_stable_nsp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_threshold: Option<f64>,
}

fn kappa_spec(a: &BoundsArgs) -> CliResult<KappaSpec> {
    if let Some(path) = &a.kappa_config {
        return read_json(path);
    }
    let regime = a
        .regime
        .ok_or_else(|| CliError::Validation("missing regime: pass `--regime` or `--kappa-config`".into()))?;
    Ok(match regime {
        RegimeArg::Iid => KappaSpec::Iid { c2: a.c2, c3: a.c3 },
        RegimeArg::AlphaMixing => {
            KappaSpec::AlphaMixing { alpha_bar: a.alpha_bar, beta: a.beta, c_alpha: a.c_alpha, c0: a.c0, c2: a.c2 }
        }
        RegimeArg::CMixing => KappaSpec::CMixing { sigma2: a.sigma2, b: a.b, beta: a.beta },
        RegimeArg::UniformlyErgodic => KappaSpec::UniformlyErgodic { lambda_doeblin: a.lambda_doeblin, k0: a.k0, b: a.b },
    })
}

/// Condition sides at `m`, or `None` where the inequality is not valid yet.
fn sides(spec: &KappaSpec, delta: f64, r: usize, m: u64) -> CliResult<Option<(f64, f64)>> {
    match kappa_condition_sides(spec, delta, r, m as f64) {
        Ok(s) => Ok(Some(s)),
        Err(Error::BlockingTooSmall { .. } | Error::BelowValidityBound { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn bounds(a: BoundsArgs) -> CliResult<()> {
    let spec = kappa_spec(&a)?;
    spec.validate()?;
    if !(a.delta > 0.0 && a.delta.is_finite()) {
        return Err(CliError::Validation(format!("invalid value for `--delta`: must be positive, got {}", a.delta)));
    }
    let m_min = min_samples_kappa(&spec, a.delta, a.r)?;
    let at_min = match m_min {
        Some(m) => sides(&spec, a.delta, a.r, m)?,
        None => None,
    };
    let mut out = BoundsOutput {
        regime: spec.regime(),
        delta: a.delta,
        r: a.r,
        m_min,
        kappa_at_m_min: at_min.map(|s| s.0),
        rhs_at_m_min: at_min.map(|s| s.1),
        m: a.m,
        condition: None,
        kappa_at_m: None,
        rhs_at_m: None,
        m_nsp: None,
        m_stable_nsp: None,
        lambda_threshold: None,
    };
    if let Some(m) = a.m {
        if m < 2 {
            return Err(CliError::Validation(format!("invalid value for `--m`: must be at least 2, got {m}")));
        }
        let s = sides(&spec, a.delta, a.r, m)?;
        out.condition = Some(s.is_some_and(|(l, r)| l >= r));
        out.kappa_at_m = s.map(|s| s.0);
        out.rhs_at_m = s.map(|s| s.1);
    }
    if let Some(d) = a.d_const {
        out.m_nsp = Some(min_samples_nsp(a.b_x, a.b_theta, a.s, d, a.delta, a.p)?);
        if let Some(rho) = a.rho {
            out.m_stable_nsp = Some(min_samples_stable_nsp(a.b_x, a.b_theta, a.s, d, a.delta, a.p, rho)?);
        }
        if let Some(m) = a.m {
            out.lambda_threshold = match lambda_threshold(m, d, a.s, a.b_x, a.b_theta, a.p) {
                Ok(v) => Some(v),
                Err(Error::SamplesTooSmall { .. }) => None,
                Err(e) => return Err(e.into()),
            };
        }
    }
    write_json(None, &out)
}

fn nsp(a: NspArgs) -> CliResult<()> {
    let m = read_matrix(open(&a.matrix)?).map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", a.matrix.display())),
        e => e,
    })?;
    let report = nsp_check(&m, a.s)?;
    write_json(a.output.as_deref(), &report)
}

/// `<parent>/exampleN-<UTC timestamp>`, suffixed with a counter if taken.
fn fresh_run_dir(parent: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!("{name}-{stamp}");
    for k in 0.. {
        let dir = if k == 0 { parent.join(&base) } else { parent.join(format!("{base}-{k}")) };
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(io_err(&dir, e)),
        }
    }
    unreachable!()
}

fn reproduce(a: ReproduceArgs) -> CliResult<()> {
    let opts = PresetOptions { n_trials: a.trials, master_seed: a.seed, low_rate: a.low_rate };
    let preset = preset_example(a.n, opts)?;
    let report = preset.run(a.timing)?;
    let dir = fresh_run_dir(&a.out_dir, &preset.name)?;
    write_json(Some(&dir.join("preset.json")), &preset)?;
    for series in &report.series {
        write_series(&dir, series)?;
    }
    println!("{}", dir.display());
    Ok(())
}
