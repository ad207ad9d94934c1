//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a configuration
//! error (bad flags, invalid parameters, unwritable output).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::harness::exec::Executor;
use crate::harness::experiments::{self, ExperimentConfig, ExperimentKind};
use crate::harness::record::{write_rows, ITER_HEADER, RESULT_HEADER};
use crate::model::NoiseNorm;
use crate::solvers::Algorithm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn parse_items<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("invalid {what} '{t}'")))
        .collect()
}

/// Comma list of numbers; an item `a:b:step` expands to `a, a+step, …, b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<f64> = parse_items(&item.replace(':', ","), "number")?;
            match parts.as_slice() {
                [v] if !item.contains(':') => out.push(*v),
                [a, b, step] if *step > 0.0 && b >= a => {
                    let k = ((b - a) / step + 1e-9).floor() as usize;
                    out.extend((0..=k).map(|i| ((a + i as f64 * step) * 1e10).round() / 1e10));
                }
                _ => return Err(format!("invalid range '{item}', expected start:stop:step")),
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsizeList(pub Vec<usize>);

impl FromStr for UsizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_items(s, "integer")?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(Self(v))
    }
}

/// Comma list of algorithm names; may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoList(pub Vec<Algorithm>);

impl FromStr for AlgoList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_items(s, "algorithm").map(Self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    L2,
    Linf,
}

#[derive(Debug, Parser)]
#[command(name = "robust-phase", version, about = "Robust phase retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured trials once and report each outcome.
    Single(Common),
    /// Success counts over an (n, m/n) grid without corruption.
    PhaseGrid(Common),
    /// Success counts over outlier fraction and magnitude.
    OutlierSweep(Common),
    /// Error per iteration under bounded noise and outliers.
    NoiseCurve(Common),
    /// Error per iteration under Poisson sampling and integer outliers.
    Poisson(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Signal dimensions, comma separated.
    #[arg(long)]
    n: Option<UsizeList>,
    /// Number of measurements; overrides --m-over-n.
    #[arg(long)]
    m: Option<usize>,
    /// Oversampling ratios, e.g. `2,4` or `2:6:0.5`.
    #[arg(long = "m-over-n")]
    m_over_n: Option<FloatList>,
    #[arg(long)]
    trials: Option<usize>,
    /// Algorithms: median-twf, median-rwf, twf, rwf, trimean-twf.
    #[arg(long, alias = "algo")]
    algos: Option<AlgoList>,
    /// Outlier fractions.
    #[arg(long)]
    s: Option<FloatList>,
    /// Outlier magnitude in units of ‖x‖².
    #[arg(long = "eta-max-rel")]
    eta_max_rel: Option<FloatList>,
    /// Dense noise bound in units of ‖x‖².
    #[arg(long = "w-max-rel")]
    w_max_rel: Option<FloatList>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 runs sequentially, omitted uses all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run exactly `--iters` iterations; `--fixed-T false` stops early.
    #[arg(long = "fixed-T", value_name = "BOOL", default_value_t = true,
          num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    fixed_t: bool,
    /// Iteration budget T.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Success threshold on the relative error.
    #[arg(long, default_value_t = crate::metrics::DEFAULT_SUCCESS_TOL)]
    tol: f64,
    /// Record wall time per trial (makes output run dependent).
    #[arg(long)]
    timing: bool,
    /// Norm of w used as the outlier value in noise curves.
    #[arg(long = "noise-norm", value_enum, default_value_t = NormArg::L2)]
    noise_norm: NormArg,
}

impl Common {
    fn into_config(self, kind: ExperimentKind) -> (ExperimentConfig, Option<PathBuf>) {
        let mut cfg = ExperimentConfig::new(kind);
        if let Some(v) = self.n {
            cfg.n = v.0;
        }
        cfg.m = self.m;
        if let Some(v) = self.m_over_n {
            cfg.m_over_n = v.0;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.algos {
            cfg.algorithms = v.0;
        }
        if let Some(v) = self.s {
            cfg.s = v.0;
        }
        if let Some(v) = self.eta_max_rel {
            cfg.eta_max_rel = v.0;
        }
        if let Some(v) = self.w_max_rel {
            cfg.w_max_rel = v.0;
        }
        cfg.master_seed = self.seed;
        cfg.threads = self.threads;
        cfg.options.fixed_t = self.fixed_t;
        cfg.options.max_iters = self.iters;
        cfg.options.tol = self.tol;
        cfg.options.timing = self.timing;
        cfg.options.noise_norm = match self.noise_norm {
            NormArg::L2 => NoiseNorm::L2,
            NormArg::Linf => NoiseNorm::LInf,
        };
        (cfg, self.out)
    }
}

fn run(cfg: &ExperimentConfig, out: Box<dyn Write>) -> crate::Result<String> {
    let exec = Executor::from_threads(cfg.threads);
    let tag = cfg.kind.tag();
    if cfg.kind.is_curve() {
        let rows = match cfg.kind {
            ExperimentKind::NoiseCurve => experiments::noise_curve(cfg, exec)?,
            _ => experiments::poisson_experiment(cfg, exec)?,
        };
        write_rows(out, ITER_HEADER, &rows)?;
        let curves = rows.iter().filter(|r| r.t == 0).count();
        return Ok(format!("{tag}: {} iteration rows, {curves} curves", rows.len()));
    }
    let rows = match cfg.kind {
        ExperimentKind::PhaseGrid => experiments::phase_grid(cfg, exec)?,
        ExperimentKind::OutlierSweep => experiments::outlier_sweep(cfg, exec)?,
        _ => experiments::single(cfg, exec)?,
    };
    write_rows(out, RESULT_HEADER, &rows)?;
    let ok = rows.iter().filter(|r| r.success == 1).count();
    Ok(format!("{tag}: {} trials, {ok} successful", rows.len()))
}

/// Parses `argv` (program name first), runs the experiment and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (kind, common) = match cli.command {
        Command::Single(c) => (ExperimentKind::Single, c),
        Command::PhaseGrid(c) => (ExperimentKind::PhaseGrid, c),
        Command::OutlierSweep(c) => (ExperimentKind::OutlierSweep, c),
        Command::NoiseCurve(c) => (ExperimentKind::NoiseCurve, c),
        Command::Poisson(c) => (ExperimentKind::Poisson, c),
    };
    let (cfg, out_path) = common.into_config(kind);
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let out: Box<dyn Write> = match &out_path {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(io::BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    match run(&cfg, out) {
        Ok(summary) => {
            match &out_path {
                Some(path) => println!("{summary} -> {}", path.display()),
                None => eprintln!("{summary}"),
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
