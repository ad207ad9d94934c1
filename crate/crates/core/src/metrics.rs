//! Error metrics up to global sign, the success rule, and statistics used by
//! the empirical checks.

use crate::error::{invalid, Result};
use crate::linalg::{dot, norm};
use crate::model::SensingEnsemble;
use crate::quantile::select_quantile;

pub const DEFAULT_SUCCESS_TOL: f64 = 1e-8;

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return invalid(format!("length mismatch: {} vs {}", a.len(), b.len()));
    }
    Ok(())
}

/// `min(‖z + x‖, ‖z − x‖)`
pub fn dist(z: &[f64], x: &[f64]) -> Result<f64> {
    same_len(z, x)?;
    Ok(dist_unchecked(z, x))
}

pub(crate) fn dist_unchecked(z: &[f64], x: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in z.iter().zip(x) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    minus.min(plus).sqrt()
}

/// `dist(z, x) / ‖x‖`
pub fn relative_error(z: &[f64], x: &[f64]) -> Result<f64> {
    same_len(z, x)?;
    let nx = norm(x);
    if nx == 0.0 {
        return invalid("relative error against a zero signal");
    }
    Ok(dist_unchecked(z, x) / nx)
}

/// Success is `error <= tol`, boundary inclusive.
pub fn is_success(error: f64, tol: f64) -> bool {
    error <= tol
}

/// Fraction of indices with `(a_iᵀx)(a_iᵀz) < 0`.
pub fn sign_flip_fraction(ensemble: &SensingEnsemble, x: &[f64], z: &[f64]) -> Result<f64> {
    ensemble.check_dim(x.len())?;
    ensemble.check_dim(z.len())?;
    let flips = ensemble
        .rows()
        .filter(|a| dot(a, x) * dot(a, z) < 0.0)
        .count();
    Ok(flips as f64 / ensemble.m() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// `|(a_iᵀx)² − (a_iᵀz)²|`
    Intensity,
    /// `||a_iᵀx| − |a_iᵀz||`
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualQuantiles {
    pub median: f64,
    pub q49: f64,
    pub q51: f64,
}

pub fn residual_median_stats(
    ensemble: &SensingEnsemble,
    x: &[f64],
    z: &[f64],
    kind: ResidualKind,
) -> Result<ResidualQuantiles> {
    ensemble.check_dim(x.len())?;
    ensemble.check_dim(z.len())?;
    let mut r: Vec<f64> = ensemble
        .rows()
        .map(|a| {
            let (ax, az) = (dot(a, x), dot(a, z));
            match kind {
                ResidualKind::Intensity => (ax * ax - az * az).abs(),
                ResidualKind::Amplitude => (ax.abs() - az.abs()).abs(),
            }
        })
        .collect();
    Ok(ResidualQuantiles {
        median: select_quantile(&mut r, 0.5),
        q49: select_quantile(&mut r, 0.49),
        q51: select_quantile(&mut r, 0.51),
    })
}

/// Summary of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub final_relative_error: f64,
    pub iterations_used: usize,
    /// First iteration at which the error fell to or below `10^-k`, for
    /// `k = 1..=decades.len()`.
    pub decades: Vec<Option<usize>>,
}

impl TrialOutcome {
    pub fn from_errors(errors: &[f64], tol: f64) -> Self {
        let last = errors.last().copied().unwrap_or(f64::INFINITY);
        let decades = (1..=16)
            .map(|k| {
                let level = 10f64.powi(-k);
                errors.iter().position(|e| *e <= level)
            })
            .collect();
        Self {
            success: is_success(last, tol),
            final_relative_error: last,
            iterations_used: errors.len().saturating_sub(1),
            decades,
        }
    }
}
