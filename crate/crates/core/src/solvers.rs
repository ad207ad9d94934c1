//! Truncated gradient descent for phase retrieval.
//!
//! * **median-TWF** descends the Poisson loss
//!   `(1/2m) Σ (|a_iᵀz|² − y_i log |a_iᵀz|²)` keeping index `i` only when
//!   `α_l‖z‖ <= |a_iᵀz| <= α_u‖z‖` and
//!   `|y_i − |a_iᵀz|²| <= α_h K_t |a_iᵀz| / ‖z‖`, where `K_t` is the sample
//!   median of the residuals `|y_i − |a_iᵀz|²|`.
//! * **median-RWF** descends the reshaped loss `(1/2m) Σ (√y_i − |a_iᵀz|)²`
//!   keeping `i` when `|√y_i − |a_iᵀz|| <= α'_h M_t`, `M_t` the median of the
//!   same amplitude residuals.
//!
//! The baselines are simplified stand-ins for the published methods:
//! [`Algorithm::MeanTWF`] is median-TWF with `K_t` replaced by the residual
//! mean and a mean-scaled initialization, [`Algorithm::PlainRWF`] is the
//! untruncated reshaped gradient, and [`Algorithm::TrimeanTWF`] drops the
//! `⌈s·m⌉` largest residuals (with `s` known) before averaging.
//!
//! Threshold comparisons are closed (`<=`), so ties keep the sample. For the
//! reshaped gradient `√y_i` means `√max(y_i, 0)` and `sign(0) = +1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::init::{self, largest_indices, InitResult};
use crate::linalg::{axpy, dot, norm};
use crate::metrics::{dist_unchecked, DEFAULT_SUCCESS_TOL};
use crate::model::{ProblemInstance, SensingEnsemble, SignalVector};
use crate::quantile::select_quantile;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    MedianTWF,
    MedianRWF,
    MeanTWF,
    PlainRWF,
    TrimeanTWF,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::MedianTWF,
        Algorithm::MedianRWF,
        Algorithm::MeanTWF,
        Algorithm::PlainRWF,
        Algorithm::TrimeanTWF,
    ];

    /// Command-line and CSV name.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MedianTWF => "median-twf",
            Algorithm::MedianRWF => "median-rwf",
            Algorithm::MeanTWF => "twf",
            Algorithm::PlainRWF => "rwf",
            Algorithm::TrimeanTWF => "trimean-twf",
        }
    }

    pub fn is_reshaped(self) -> bool {
        matches!(self, Algorithm::MedianRWF | Algorithm::PlainRWF)
    }

    /// Whether the run starts from the median-scaled spectral estimate.
    /// The mean baselines use the mean scale and trimean-TWF the trimmed one.
    pub fn uses_median_init(self) -> bool {
        matches!(self, Algorithm::MedianTWF | Algorithm::MedianRWF)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub mu: f64,
    pub alpha_l: f64,
    pub alpha_u: f64,
    pub alpha_y: f64,
    pub alpha_h: f64,
    pub alpha_h_prime: f64,
    /// Iteration budget `T`.
    pub max_iters: usize,
    pub success_tol: f64,
    /// Outlier fraction handed to trimean-TWF.
    pub known_s: Option<f64>,
    /// Run all `T` iterations; otherwise stop once the relative error reaches
    /// `success_tol` or the gradient norm drops to [`VANISHING_GRADIENT`].
    pub fixed_t: bool,
}

pub const VANISHING_GRADIENT: f64 = 1e-14;

impl SolverConfig {
    /// Defaults: `μ = 0.4` (TWF family) or `0.8` (RWF family),
    /// `α_l = 0.3, α_u = 5, α_y = 3, α_h = 12, α'_h = 5, T = 500`.
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            mu: if algorithm.is_reshaped() { 0.8 } else { 0.4 },
            alpha_l: 0.3,
            alpha_u: 5.0,
            alpha_y: init::DEFAULT_ALPHA_Y,
            alpha_h: 12.0,
            alpha_h_prime: 5.0,
            max_iters: 500,
            success_tol: DEFAULT_SUCCESS_TOL,
            known_s: None,
            fixed_t: true,
        }
    }

    pub fn with_known_s(mut self, s: f64) -> Self {
        self.known_s = Some(s);
        self
    }

    pub fn early_stop(mut self) -> Self {
        self.fixed_t = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} = {v} must be positive and finite"))
            }
        };
        positive("mu", self.mu)?;
        positive("alpha_l", self.alpha_l)?;
        positive("alpha_h", self.alpha_h)?;
        positive("alpha_h_prime", self.alpha_h_prime)?;
        positive("alpha_y", self.alpha_y)?;
        positive("success_tol", self.success_tol)?;
        if !(self.alpha_l < self.alpha_u) {
            return invalid(format!(
                "alpha_l = {} must be below alpha_u = {}",
                self.alpha_l, self.alpha_u
            ));
        }
        if self.max_iters == 0 {
            return invalid("iteration budget must be at least 1");
        }
        if self.algorithm == Algorithm::TrimeanTWF {
            match self.known_s {
                Some(s) if (0.0..0.5).contains(&s) => {}
                Some(s) => return invalid(format!("known_s = {s} must lie in [0, 0.5)")),
                None => return invalid("trimean-twf needs the outlier fraction (known_s)"),
            }
        }
        Ok(())
    }
}

/// Gaussian moments of the median-TWF thresholds and the resulting check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwfParamReport {
    pub zeta1: f64,
    pub zeta2: f64,
    /// `2(ζ₁ + ζ₂) + √(8/π)/α_h`
    pub lhs: f64,
    /// `lhs < 1.99` and `α_y >= 3`
    pub condition_holds: bool,
}

/// `ζ₁ = max{E[ξ²1_A], P(A)}` with `A = {|ξ| < √1.01 α_l} ∪ {|ξ| > √0.99 α_u}`,
/// `ζ₂ = E[ξ² 1{|ξ| > 0.248 α_h}]`, `ξ ~ N(0,1)`. Report only; accepts any
/// threshold values.
pub fn validate_twf_params(cfg: &SolverConfig) -> TwfParamReport {
    let inner = 1.01f64.sqrt() * cfg.alpha_l;
    let outer = 0.99f64.sqrt() * cfg.alpha_u;
    let (moment, prob) = if inner >= outer {
        (1.0, 1.0)
    } else {
        (
            special::second_moment_abs_below(inner) + special::second_moment_abs_above(outer),
            special::prob_abs_below(inner) + special::prob_abs_above(outer),
        )
    };
    let zeta1 = moment.max(prob);
    let zeta2 = special::second_moment_abs_above(0.248 * cfg.alpha_h);
    let lhs = 2.0 * (zeta1 + zeta2) + (8.0 / std::f64::consts::PI).sqrt() / cfg.alpha_h;
    TwfParamReport { zeta1, zeta2, lhs, condition_holds: lhs < 1.99 && cfg.alpha_y >= 3.0 }
}

/// A truncated gradient together with the truncation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEval {
    pub gradient: Vec<f64>,
    /// Number of indices that contributed.
    pub kept: usize,
    /// The statistic guiding truncation (`K_t`, `M_t`, mean or trimmed mean).
    pub statistic: f64,
}

#[derive(Debug, Clone, Copy)]
enum ResidualScale {
    Median,
    Mean,
    Trimmed(f64),
}

fn prepare(ensemble: &SensingEnsemble, y: &[f64], z: &[f64]) -> Result<(f64, Vec<f64>)> {
    ensemble.check_dim(z.len())?;
    ensemble.check_measurements(y.len())?;
    let nz = norm(z);
    if nz == 0.0 {
        return invalid("gradient undefined at z = 0");
    }
    Ok((nz, ensemble.forward(z)))
}

pub use crate::init::trimmed_count;

fn twf_family(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
    scale: ResidualScale,
) -> Result<GradientEval> {
    let (nz, az) = prepare(ensemble, y, z)?;
    let m = y.len();
    let resid: Vec<f64> = y.iter().zip(&az).map(|(yi, a)| (yi - a * a).abs()).collect();
    let mut eligible = vec![true; m];
    let statistic = match scale {
        ResidualScale::Median => select_quantile(&mut resid.clone(), 0.5),
        ResidualScale::Mean => resid.iter().sum::<f64>() / m as f64,
        ResidualScale::Trimmed(s) => {
            for i in largest_indices(&resid, s) {
                eligible[i] = false;
            }
            let kept: Vec<f64> = (0..m).filter(|&i| eligible[i]).map(|i| resid[i]).collect();
            kept.iter().sum::<f64>() / kept.len() as f64
        }
    };

    let (lo, hi) = (cfg.alpha_l * nz, cfg.alpha_u * nz);
    let e2_scale = cfg.alpha_h * statistic / nz;
    let mut grad = vec![0.0; z.len()];
    let mut kept = 0;
    for i in 0..m {
        let a = az[i];
        let abs_a = a.abs();
        if eligible[i] && lo <= abs_a && abs_a <= hi && resid[i] <= e2_scale * abs_a {
            axpy((a * a - y[i]) / a, ensemble.row(i), &mut grad);
            kept += 1;
        }
    }
    let inv_m = 1.0 / m as f64;
    grad.iter_mut().for_each(|g| *g *= inv_m);
    Ok(GradientEval { gradient: grad, kept, statistic })
}

/// Median-TWF truncated gradient; `statistic` is `K_t`.
pub fn mtwf_gradient(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<GradientEval> {
    twf_family(ensemble, y, z, cfg, ResidualScale::Median)
}

/// Mean-truncated TWF baseline; `statistic` is the residual mean.
pub fn twf_gradient(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<GradientEval> {
    twf_family(ensemble, y, z, cfg, ResidualScale::Mean)
}

/// Trimmed-mean TWF baseline; needs `cfg.known_s`.
pub fn trimean_twf_gradient(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<GradientEval> {
    let s = cfg
        .known_s
        .ok_or_else(|| Error::InvalidInput("trimean-twf needs known_s".into()))?;
    twf_family(ensemble, y, z, cfg, ResidualScale::Trimmed(s))
}

#[inline]
fn sign_or_plus(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn reshaped(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    threshold: Option<f64>,
) -> Result<GradientEval> {
    let (_, az) = prepare(ensemble, y, z)?;
    let m = y.len();
    let sqrt_y: Vec<f64> = y.iter().map(|v| v.max(0.0).sqrt()).collect();
    let resid: Vec<f64> = sqrt_y.iter().zip(&az).map(|(s, a)| (s - a.abs()).abs()).collect();
    let statistic = select_quantile(&mut resid.clone(), 0.5);
    let cut = threshold.map(|alpha| alpha * statistic);
    let mut grad = vec![0.0; z.len()];
    let mut kept = 0;
    for i in 0..m {
        if cut.is_some_and(|c| resid[i] > c) {
            continue;
        }
        let a = az[i];
        axpy(a - sqrt_y[i] * sign_or_plus(a), ensemble.row(i), &mut grad);
        kept += 1;
    }
    let inv_m = 1.0 / m as f64;
    grad.iter_mut().for_each(|g| *g *= inv_m);
    Ok(GradientEval { gradient: grad, kept, statistic })
}

/// Median-RWF truncated gradient; `statistic` is `M_t`.
pub fn mrwf_gradient(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<GradientEval> {
    reshaped(ensemble, y, z, Some(cfg.alpha_h_prime))
}

/// Untruncated reshaped gradient over all `m` samples.
pub fn rwf_gradient(ensemble: &SensingEnsemble, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    reshaped(ensemble, y, z, None).map(|g| g.gradient)
}

/// Gradient of the configured algorithm.
pub fn gradient(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<GradientEval> {
    match cfg.algorithm {
        Algorithm::MedianTWF => mtwf_gradient(ensemble, y, z, cfg),
        Algorithm::MedianRWF => mrwf_gradient(ensemble, y, z, cfg),
        Algorithm::MeanTWF => twf_gradient(ensemble, y, z, cfg),
        Algorithm::PlainRWF => reshaped(ensemble, y, z, None),
        Algorithm::TrimeanTWF => trimean_twf_gradient(ensemble, y, z, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub t: usize,
    pub relative_error: f64,
    pub kept: usize,
    pub statistic: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    /// One record per visited iterate `z⁽⁰⁾ … z⁽ᵗ⁾`.
    pub records: Vec<IterRecord>,
    pub z: SignalVector,
    /// First iteration whose relative error reached `success_tol`.
    pub converged_at: Option<usize>,
    /// Initialization produced the zero vector or the iterate collapsed to it.
    pub degenerate: bool,
    pub init: InitResult,
}

impl IterateTrace {
    pub fn final_relative_error(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.relative_error)
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.relative_error).collect()
    }

    /// Iteration count of the final iterate.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.t)
    }
}

/// Initializes and runs `z⁽ᵗ⁺¹⁾ = z⁽ᵗ⁾ − μ ∇ℓ_tr(z⁽ᵗ⁾)`.
///
/// The ground-truth signal of `problem` is used only to record the error
/// trace and for the optional early stop.
pub fn run_solver(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<IterateTrace> {
    cfg.validate()?;
    let ensemble = &problem.ensemble;
    let y = problem.y();
    let x = problem.signal.as_slice();
    let x_norm = norm(x);
    if x_norm == 0.0 {
        return invalid("ground-truth signal is zero");
    }
    let init = match (cfg.algorithm, cfg.known_s) {
        (Algorithm::TrimeanTWF, Some(s)) => {
            init::trimmed_spectral_init(ensemble, y, cfg.alpha_y, s)?
        }
        (alg, _) if alg.uses_median_init() => {
            init::median_spectral_init(ensemble, y, cfg.alpha_y)?
        }
        _ => init::mean_spectral_init(ensemble, y, cfg.alpha_y)?,
    };

    let mut z = init.z0.as_slice().to_vec();
    let mut records = Vec::with_capacity(cfg.max_iters + 1);
    let mut converged_at = None;
    let mut degenerate = init.degenerate;
    for t in 0..=cfg.max_iters {
        let relative_error = dist_unchecked(&z, x) / x_norm;
        if converged_at.is_none() && relative_error <= cfg.success_tol {
            converged_at = Some(t);
        }
        if degenerate || norm(&z) == 0.0 {
            records.push(IterRecord { t, relative_error, kept: 0, statistic: f64::NAN, gradient_norm: 0.0 });
            degenerate = true;
            break;
        }
        let eval = gradient(ensemble, y, &z, cfg)?;
        let gradient_norm = norm(&eval.gradient);
        records.push(IterRecord {
            t,
            relative_error,
            kept: eval.kept,
            statistic: eval.statistic,
            gradient_norm,
        });
        if t == cfg.max_iters {
            break;
        }
        if !cfg.fixed_t && (converged_at.is_some() || gradient_norm <= VANISHING_GRADIENT) {
            break;
        }
        axpy(-cfg.mu, &eval.gradient, &mut z);
    }
    let z = SignalVector::new(z)?;
    Ok(IterateTrace { records, z, converged_at, degenerate, init })
}

/// Quantities entering the regularity condition
/// `⟨∇ℓ(z), z − x⟩ >= (μ/2)‖∇ℓ(z)‖² + (λ/2)‖z − x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcProbe {
    /// `⟨∇ℓ(z), z − x̄⟩` with `x̄ ∈ {±x}` the sign closest to `z`.
    pub inner: f64,
    pub grad_norm: f64,
    pub dist: f64,
}

impl RcProbe {
    pub fn satisfies(&self, mu: f64, lambda: f64) -> bool {
        self.inner >= 0.5 * mu * self.grad_norm.powi(2) + 0.5 * lambda * self.dist.powi(2)
    }
}

pub fn rc_probe(
    ensemble: &SensingEnsemble,
    y: &[f64],
    z: &[f64],
    x: &[f64],
    cfg: &SolverConfig,
) -> Result<RcProbe> {
    ensemble.check_dim(x.len())?;
    let eval = gradient(ensemble, y, z, cfg)?;
    let minus: f64 = z.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
    let plus: f64 = z.iter().zip(x).map(|(a, b)| (a + b).powi(2)).sum();
    let sign = if minus <= plus { 1.0 } else { -1.0 };
    let h: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - sign * b).collect();
    Ok(RcProbe {
        inner: dot(&eval.gradient, &h),
        grad_norm: norm(&eval.gradient),
        dist: minus.min(plus).sqrt(),
    })
}
