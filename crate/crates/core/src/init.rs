//! Truncated spectral initialization.
//!
//! The direction is the leading eigenvector of
//! `Y = (1/m) Σ y_i a_i a_iᵀ 1{|y_i| <= α_y² λ₀²}`, found by matrix-free power
//! iteration; the scale is `λ₀ = √(med(y)/0.455)` for the median variant and
//! `λ₀ = √(mean(y))` for the mean variant used by the baselines.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::model::{SensingEnsemble, SignalVector};
use crate::quantile::select_quantile;
use crate::rng::{derive_tagged, seeded};

/// Median of the χ²₁ distribution, rounded as in the scale estimate.
pub const CHI2_MEDIAN: f64 = 0.455;
pub const DEFAULT_ALPHA_Y: f64 = 3.0;
pub const DEFAULT_POWER_TOL: f64 = 1e-6;
pub const DEFAULT_POWER_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct InitResult {
    pub z0: SignalVector,
    pub lambda0: f64,
    /// Number of samples kept by the truncation mask.
    pub truncated_count: usize,
    pub power_iters: usize,
    pub converged: bool,
    /// Set when the surrogate matrix vanished (e.g. all-zero measurements);
    /// `z0` is then the zero vector.
    pub degenerate: bool,
}

/// `λ₀ = √(med(y)/0.455)`
pub fn scale_estimate(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::InvalidInput("no measurements".into()));
    }
    let mut scratch = y.to_vec();
    let med = select_quantile(&mut scratch, 0.5);
    if med < 0.0 {
        return Err(Error::DegenerateMeasurements(format!(
            "median measurement {med} is negative"
        )));
    }
    Ok((med / CHI2_MEDIAN).sqrt())
}

/// `λ₀ = √(mean(y))`
pub fn mean_scale_estimate(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::InvalidInput("no measurements".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if mean < 0.0 {
        return Err(Error::DegenerateMeasurements(format!(
            "mean measurement {mean} is negative"
        )));
    }
    Ok(mean.sqrt())
}

/// `1{|y_i| <= α_y² λ₀²}`
pub fn truncation_mask(y: &[f64], alpha_y: f64, lambda0: f64) -> Vec<bool> {
    let threshold = alpha_y * alpha_y * lambda0 * lambda0;
    y.iter().map(|v| v.abs() <= threshold).collect()
}

fn surrogate_weights(y: &[f64], mask: &[bool]) -> Vec<f64> {
    let inv_m = 1.0 / y.len() as f64;
    y.iter()
        .zip(mask)
        .map(|(&v, &keep)| if keep { v * inv_m } else { 0.0 })
        .collect()
}

fn apply_weighted(ensemble: &SensingEnsemble, weights: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; ensemble.n()];
    for (a, &w) in ensemble.rows().zip(weights) {
        if w != 0.0 {
            axpy(w * dot(a, v), a, &mut out);
        }
    }
    out
}

/// `Y·v` without forming `Y`: `(1/m) Aᵀ(mask ⊙ y ⊙ Av)`.
pub fn surrogate_apply(
    ensemble: &SensingEnsemble,
    y: &[f64],
    alpha_y: f64,
    lambda0: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    ensemble.check_measurements(y.len())?;
    ensemble.check_dim(v.len())?;
    if !(alpha_y > 0.0) {
        return Err(Error::InvalidInput(format!("alpha_y {alpha_y} must be positive")));
    }
    let mask = truncation_mask(y, alpha_y, lambda0);
    Ok(apply_weighted(ensemble, &surrogate_weights(y, &mask), v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Signed Rayleigh quotient at the returned vector.
    pub eigenvalue: f64,
}

/// Power iteration for the eigenvector of largest-magnitude eigenvalue.
///
/// Convergence is declared when the chord between successive sign-aligned
/// unit iterates is at most `tol`. Hitting `max_iters` is not an error: the
/// last iterate is returned with `converged = false`. If the operator maps
/// the current iterate to zero the iterate is returned with eigenvalue 0.
pub fn leading_eigenvector<F>(
    apply: F,
    n: usize,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<PowerResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let mut rng = seeded(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|t| *t /= nv);

    let mut eigenvalue = 0.0;
    for it in 1..=max_iters {
        let mut w = apply(&v);
        eigenvalue = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(PowerResult { vector: v, iterations: it, converged: false, eigenvalue: 0.0 });
        }
        let sign = if dot(&w, &v) < 0.0 { -1.0 } else { 1.0 };
        w.iter_mut().for_each(|t| *t *= sign / nw);
        let chord = w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        v = w;
        if chord <= tol {
            return Ok(PowerResult { vector: v, iterations: it, converged: true, eigenvalue });
        }
    }
    Ok(PowerResult { vector: v, iterations: max_iters, converged: false, eigenvalue })
}

fn spectral_init(ensemble: &SensingEnsemble, y: &[f64], alpha_y: f64, lambda0: f64) -> Result<InitResult> {
    let mask = truncation_mask(y, alpha_y, lambda0);
    masked_spectral_init(ensemble, y, mask, lambda0)
}

fn masked_spectral_init(
    ensemble: &SensingEnsemble,
    y: &[f64],
    mask: Vec<bool>,
    lambda0: f64,
) -> Result<InitResult> {
    let n = ensemble.n();
    let truncated_count = mask.iter().filter(|k| **k).count();
    let weights = surrogate_weights(y, &mask);
    let degenerate_result = |iters| InitResult {
        z0: SignalVector::zeros(n),
        lambda0,
        truncated_count,
        power_iters: iters,
        converged: false,
        degenerate: true,
    };
    if lambda0 == 0.0 || weights.iter().all(|w| *w == 0.0) {
        return Ok(degenerate_result(0));
    }
    let seed = derive_tagged(ensemble.seed(), "power-iteration");
    let power = leading_eigenvector(
        |v| apply_weighted(ensemble, &weights, v),
        n,
        DEFAULT_POWER_TOL,
        DEFAULT_POWER_ITERS,
        seed,
    )?;
    if power.eigenvalue == 0.0 && !power.converged {
        return Ok(degenerate_result(power.iterations));
    }
    let z0 = SignalVector::new(power.vector.iter().map(|t| lambda0 * t).collect())?;
    Ok(InitResult {
        z0,
        lambda0,
        truncated_count,
        power_iters: power.iterations,
        converged: power.converged,
        degenerate: false,
    })
}

fn check_inputs(ensemble: &SensingEnsemble, y: &[f64], alpha_y: f64) -> Result<()> {
    ensemble.check_measurements(y.len())?;
    if !(alpha_y > 0.0) {
        return Err(Error::InvalidInput(format!("alpha_y {alpha_y} must be positive")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("measurements must be finite".into()));
    }
    Ok(())
}

/// Median-truncated spectral initialization.
pub fn median_spectral_init(ensemble: &SensingEnsemble, y: &[f64], alpha_y: f64) -> Result<InitResult> {
    check_inputs(ensemble, y, alpha_y)?;
    spectral_init(ensemble, y, alpha_y, scale_estimate(y)?)
}

/// Mean-scaled truncated spectral initialization (baselines).
pub fn mean_spectral_init(ensemble: &SensingEnsemble, y: &[f64], alpha_y: f64) -> Result<InitResult> {
    check_inputs(ensemble, y, alpha_y)?;
    spectral_init(ensemble, y, alpha_y, mean_scale_estimate(y)?)
}

/// Number of largest samples a trimmed mean at fraction `s` discards:
/// `⌈s·m⌉`, capped so that one sample remains.
pub fn trimmed_count(m: usize, s: f64) -> usize {
    ((s * m as f64 - 1e-9).ceil().max(0.0) as usize).min(m.saturating_sub(1))
}

/// Indices of the `trimmed_count(m, s)` largest values, ties broken by index.
pub(crate) fn largest_indices(values: &[f64], s: f64) -> Vec<usize> {
    let drop = trimmed_count(values.len(), s);
    if drop == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.select_nth_unstable_by(drop - 1, |&i, &j| {
        values[j].total_cmp(&values[i]).then(i.cmp(&j))
    });
    order.truncate(drop);
    order
}

/// Trimmed-mean spectral initialization (trimean-TWF baseline).
///
/// The `⌈s·m⌉` largest measurements are discarded, `λ₀² ` is the mean of the
/// rest, and the surrogate is formed from the remaining samples that pass
/// the usual `α_y² λ₀²` cut.
pub fn trimmed_spectral_init(
    ensemble: &SensingEnsemble,
    y: &[f64],
    alpha_y: f64,
    s: f64,
) -> Result<InitResult> {
    check_inputs(ensemble, y, alpha_y)?;
    if !(0.0..0.5).contains(&s) {
        return Err(Error::InvalidInput(format!("trim fraction {s} must lie in [0, 0.5)")));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("no measurements".into()));
    }
    let mut keep = vec![true; y.len()];
    for i in largest_indices(y, s) {
        keep[i] = false;
    }
    let kept: Vec<f64> = y.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect();
    let lambda0 = mean_scale_estimate(&kept)?;
    let mask = truncation_mask(y, alpha_y, lambda0)
        .into_iter()
        .zip(&keep)
        .map(|(a, b)| a && *b)
        .collect();
    masked_spectral_init(ensemble, y, mask, lambda0)
}
