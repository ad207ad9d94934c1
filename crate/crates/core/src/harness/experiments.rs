//! Sweep definitions and trial execution.

use std::fmt;
use std::time::Instant;

use crate::error::{invalid, Result};
use crate::harness::exec::Executor;
use crate::harness::record::{IterRow, ResultRow};
use crate::metrics::{is_success, DEFAULT_SUCCESS_TOL};
use crate::model::{generate_problem, CorruptionSpec, NoiseNorm, OutlierModel};
use crate::rng::{derive, tag_word};
use crate::solvers::{run_solver, Algorithm, IterateTrace, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Single,
    PhaseGrid,
    OutlierSweep,
    NoiseCurve,
    Poisson,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Single => "single",
            ExperimentKind::PhaseGrid => "phase-grid",
            ExperimentKind::OutlierSweep => "outlier-sweep",
            ExperimentKind::NoiseCurve => "noise-curve",
            ExperimentKind::Poisson => "poisson",
        }
    }

    /// Whether the experiment produces per-iteration curves.
    pub fn is_curve(self) -> bool {
        matches!(self, ExperimentKind::NoiseCurve | ExperimentKind::Poisson)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Solver settings shared by every trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub fixed_t: bool,
    /// Record wall time; off by default so that output is reproducible.
    pub timing: bool,
    /// Norm of `w` used as the outlier value in noise curves.
    pub noise_norm: NoiseNorm,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: DEFAULT_SUCCESS_TOL,
            fixed_t: true,
            timing: false,
            noise_norm: NoiseNorm::L2,
        }
    }
}

impl TrialOptions {
    pub fn solver_config(&self, algorithm: Algorithm, s: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(algorithm);
        cfg.max_iters = self.max_iters;
        cfg.success_tol = self.tol;
        cfg.fixed_t = self.fixed_t;
        if algorithm == Algorithm::TrimeanTWF {
            cfg = cfg.with_known_s(s);
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: Vec<usize>,
    /// Fixed measurement count; overrides `m_over_n` when set.
    pub m: Option<usize>,
    pub m_over_n: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub s: Vec<f64>,
    pub eta_max_rel: Vec<f64>,
    pub w_max_rel: Vec<f64>,
    pub master_seed: u64,
    /// `None` uses every available core; `Some(1)` runs sequentially.
    pub threads: Option<usize>,
    pub options: TrialOptions,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn new(kind: ExperimentKind) -> Self {
        use Algorithm::*;
        let base = Self {
            kind,
            n: vec![64],
            m: None,
            m_over_n: vec![8.0],
            trials: 1,
            algorithms: vec![MedianTWF, MedianRWF, MeanTWF],
            s: vec![0.0],
            eta_max_rel: vec![0.0],
            w_max_rel: vec![0.0],
            master_seed: 0,
            threads: None,
            options: TrialOptions::default(),
        };
        match kind {
            ExperimentKind::Single => Self {
                m_over_n: vec![6.0],
                algorithms: vec![MedianRWF],
                eta_max_rel: vec![1.0],
                ..base
            },
            ExperimentKind::PhaseGrid => Self {
                n: vec![64, 128],
                m_over_n: vec![2.0, 3.0, 4.0, 5.0, 6.0],
                trials: 20,
                algorithms: vec![MedianTWF, MedianRWF, MeanTWF, PlainRWF],
                ..base
            },
            ExperimentKind::OutlierSweep => Self {
                trials: 20,
                algorithms: vec![MedianTWF, MedianRWF, MeanTWF, TrimeanTWF],
                s: (0..=6).map(|k| f64::from(k) * 0.05).map(round10).collect(),
                eta_max_rel: vec![0.1, 1.0, 10.0, 100.0],
                ..base
            },
            ExperimentKind::NoiseCurve => Self {
                s: vec![0.1],
                w_max_rel: vec![0.01, 0.001],
                ..base
            },
            ExperimentKind::Poisson => Self { s: vec![0.1], ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return invalid("signal dimensions must be a nonempty list of positive integers");
        }
        match self.m {
            Some(0) => return invalid("measurement count must be positive"),
            Some(_) => {}
            None => {
                if self.m_over_n.is_empty() {
                    return invalid("m/n grid is empty");
                }
                if let Some(r) = self.m_over_n.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
                    return invalid(format!("m/n = {r} must be positive"));
                }
            }
        }
        for (name, grid) in [("s", &self.s), ("eta_max_rel", &self.eta_max_rel), ("w_max_rel", &self.w_max_rel)] {
            if grid.is_empty() {
                return invalid(format!("{name} grid is empty"));
            }
        }
        if !(self.options.tol > 0.0) {
            return invalid(format!("tolerance {} must be positive", self.options.tol));
        }
        if self.options.max_iters == 0 {
            return invalid("iteration budget must be at least 1");
        }
        for cell in self.cells() {
            cell.corruption.validate()?;
        }
        Ok(())
    }

    fn corruption(&self, s: f64, eta_max_rel: f64, w_max_rel: f64) -> CorruptionSpec {
        let base = CorruptionSpec { w_max_rel, ..CorruptionSpec::uniform_outliers(s, eta_max_rel) };
        match self.kind {
            ExperimentKind::NoiseCurve => CorruptionSpec {
                outlier_model: OutlierModel::NormBernoulli { norm: self.options.noise_norm },
                ..base
            },
            ExperimentKind::Poisson => CorruptionSpec {
                outlier_model: OutlierModel::IntegerUniform,
                poisson: true,
                ..base
            },
            _ => base,
        }
    }

    /// Grid cells in canonical order: n, m, s, η_max, w_max.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.n {
            let ms: Vec<usize> = match self.m {
                Some(m) => vec![m],
                None => self.m_over_n.iter().map(|r| ((r * n as f64).round() as usize).max(1)).collect(),
            };
            for m in ms {
                for &s in &self.s {
                    for &eta in &self.eta_max_rel {
                        for &w in &self.w_max_rel {
                            cells.push(Cell {
                                index: cells.len(),
                                n,
                                m,
                                s,
                                eta_max_rel: eta,
                                w_max_rel: w,
                                corruption: self.corruption(s, eta, w),
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Problem seed of `(cell, trial)`. Every algorithm in a cell sees the
    /// same instance.
    pub fn trial_seed(&self, cell: usize, trial: usize) -> u64 {
        derive(self.master_seed, &[tag_word(self.kind.tag()), cell as u64, trial as u64])
    }
}

fn round10(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// One point of a parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub eta_max_rel: f64,
    pub w_max_rel: f64,
    pub corruption: CorruptionSpec,
}

fn solve(
    cell: &Cell,
    corruption: &CorruptionSpec,
    algorithm: Algorithm,
    seed: u64,
    opts: &TrialOptions,
) -> Result<IterateTrace> {
    let problem = generate_problem(cell.n, cell.m, corruption, seed)?;
    run_solver(&problem, &opts.solver_config(algorithm, cell.s))
}

/// Generates the instance of `trial_seed` and runs one solver on it. A
/// failing run yields a row with `success = 0` and a NaN error.
pub fn run_trial(
    experiment: &str,
    cell: &Cell,
    algorithm: Algorithm,
    trial_seed: u64,
    opts: &TrialOptions,
) -> ResultRow {
    let start = Instant::now();
    let outcome = solve(cell, &cell.corruption, algorithm, trial_seed, opts);
    let wall_time_ms = if opts.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let (final_rel_err, iterations) = match &outcome {
        Ok(trace) => (trace.final_relative_error(), trace.iterations()),
        Err(_) => (f64::NAN, 0),
    };
    ResultRow {
        experiment: experiment.to_string(),
        algorithm: algorithm.name().to_string(),
        n: cell.n,
        m: cell.m,
        s: cell.s,
        eta_max_rel: cell.eta_max_rel,
        w_max_rel: cell.w_max_rel,
        seed: trial_seed,
        success: u8::from(is_success(final_rel_err, opts.tol)),
        final_rel_err,
        iterations,
        wall_time_ms,
    }
}

fn sweep(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let mut jobs = Vec::new();
    for cell in &cells {
        for &alg in &cfg.algorithms {
            for trial in 0..cfg.trials {
                jobs.push((cell, alg, cfg.trial_seed(cell.index, trial)));
            }
        }
    }
    let tag = cfg.kind.tag();
    exec.map(&jobs, |(cell, alg, seed)| run_trial(tag, cell, *alg, *seed, &cfg.options))
}

/// Runs the configured cells as independent trials.
pub fn single(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<ResultRow>> {
    sweep(cfg, exec)
}

/// Success counts over the (n, m/n) grid.
pub fn phase_grid(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<ResultRow>> {
    sweep(cfg, exec)
}

/// Success counts over the (s, η_max) grid.
pub fn outlier_sweep(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<ResultRow>> {
    sweep(cfg, exec)
}

/// Error-versus-iteration curves under bounded noise plus `‖w‖`-valued
/// outliers, and the mean baseline on the same instance without outliers.
pub fn noise_curve(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<IterRow>> {
    curves(cfg, exec, "dense-only")
}

/// Error-versus-iteration curves under Poisson sampling plus integer
/// outliers, and the mean baseline under Poisson sampling alone.
pub fn poisson_experiment(cfg: &ExperimentConfig, exec: Executor) -> Result<Vec<IterRow>> {
    curves(cfg, exec, "no-outliers")
}

fn curve_label(cfg: &ExperimentConfig, cell: &Cell, suffix: Option<&str>) -> String {
    let mut label = format!("{}:s={}:w={}", cfg.kind.tag(), cell.s, cell.w_max_rel);
    if let Some(suffix) = suffix {
        label.push(':');
        label.push_str(suffix);
    }
    label
}

fn curves(cfg: &ExperimentConfig, exec: Executor, baseline: &str) -> Result<Vec<IterRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    // (cell, algorithm, trial, without outliers)
    let mut jobs = Vec::new();
    for cell in &cells {
        for trial in 0..cfg.trials {
            let seed = cfg.trial_seed(cell.index, trial);
            for &alg in &cfg.algorithms {
                jobs.push((cell, alg, seed, false));
            }
            if !cfg.algorithms.is_empty() {
                jobs.push((cell, Algorithm::MeanTWF, seed, true));
            }
        }
    }
    let rows = exec.map(&jobs, |(cell, alg, seed, clean)| {
        let mut corruption = cell.corruption;
        if *clean {
            corruption.outlier_fraction = 0.0;
        }
        let label = curve_label(cfg, cell, clean.then_some(baseline));
        match solve(cell, &corruption, *alg, *seed, &cfg.options) {
            Ok(trace) => trace
                .records
                .iter()
                .map(|r| IterRow {
                    experiment: label.clone(),
                    algorithm: alg.name().to_string(),
                    n: cell.n,
                    m: cell.m,
                    seed: *seed,
                    t: r.t,
                    rel_err: r.relative_error,
                    kept: r.kept,
                    median_stat: r.statistic,
                })
                .collect(),
            Err(_) => Vec::new(),
        }
    })?;
    Ok(rows.into_iter().flatten().collect())
}
