//! Generalized sample quantiles and the distribution of `|uv|` for
//! correlated standard normals `u`, `v`.
//!
//! The sample `p`-quantile is the `⌈p·m⌉`-th order statistic, i.e. the
//! smallest sample at which the empirical CDF reaches `p`. For even `m` the
//! median is therefore the lower middle element, not the midpoint average.
//! Selection runs in linear time and is deterministic for a fixed input.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::special::{self, bessel_k0_scaled};

/// A nonempty buffer of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer(Vec<f64>);

impl SampleBuffer {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("sample buffer is empty");
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("sample buffer holds non-finite value {v}"));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SampleBuffer {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl TryFrom<&[f64]> for SampleBuffer {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

/// 1-based rank of the generalized `p`-quantile among `m` samples: the
/// smallest `k` with `k/m >= p`.
pub fn quantile_rank(m: usize, p: f64) -> usize {
    let mf = m as f64;
    let mut k = (p * mf).ceil() as usize;
    // guard against `p*m` landing one ulp above an integer
    if k > 1 && (k - 1) as f64 / mf >= p {
        k -= 1;
    }
    k.clamp(1, m)
}

/// Reorders `scratch` and returns its `p`-quantile. Panics on an empty slice.
pub(crate) fn select_quantile(scratch: &mut [f64], p: f64) -> f64 {
    let k = quantile_rank(scratch.len(), p);
    *scratch.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

fn check_level(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("quantile level {p} outside (0, 1)"));
    }
    Ok(())
}

pub fn sample_quantile(xs: &SampleBuffer, p: f64) -> Result<f64> {
    check_level(p)?;
    let mut scratch = xs.0.clone();
    Ok(select_quantile(&mut scratch, p))
}

pub fn sample_median(xs: &SampleBuffer) -> Result<f64> {
    sample_quantile(xs, 0.5)
}

/// Correlation between the two normal factors of `|uv|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductGaussianSpec {
    rho: f64,
}

impl ProductGaussianSpec {
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho.abs() > 1.0 {
            return invalid(format!("correlation {rho} outside [-1, 1]"));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn is_degenerate(&self) -> bool {
        self.rho.abs() == 1.0
    }
}

/// Lower cutoff of the CDF integral; the mass below it is added in closed form.
const CDF_EPS: f64 = 1e-10;
/// `P(|uv| > X) <= P(χ²₂ > 2X) = e^{-X}`, below 1e-9 here.
pub const CDF_XMAX: f64 = 25.0;

fn density_unchecked(x: f64, rho: f64) -> f64 {
    let r = rho.abs();
    if r == 1.0 {
        return special::chi2_1_pdf(x);
    }
    let s2 = 1.0 - r * r;
    // exp(±ρx/(1-ρ²))·K0(x/(1-ρ²)) with the e^{-x/(1-ρ²)} factor moved into K0.
    let scaled = bessel_k0_scaled(x / s2);
    ((-x / (1.0 + r)).exp() + (-x / (1.0 - r)).exp()) * scaled / (PI * s2.sqrt())
}

/// Density of `|uv|` at `x > 0`.
pub fn product_gaussian_density(x: f64, spec: ProductGaussianSpec) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("density argument {x} must be positive and finite"));
    }
    Ok(density_unchecked(x, spec.rho))
}

/// Mass of `|uv|` on `(0, CDF_EPS]`.
fn head_mass(rho: f64) -> f64 {
    let r = rho.abs();
    if r == 1.0 {
        return special::chi2_1_cdf(CDF_EPS);
    }
    // K0(t) ≈ -ln(t/2) - γ near zero
    let s2 = 1.0 - r * r;
    let e = CDF_EPS;
    2.0 / (PI * s2.sqrt()) * e * (1.0 - (e / (2.0 * s2)).ln() - 0.577_215_664_901_532_9)
}

/// CDF of `|uv|` at `x`, by adaptive quadrature of the density.
///
/// Integrates in `u = √x`, which absorbs the `x^{-1/2}` singularity of the
/// `|ρ| = 1` branch and flattens the logarithmic one otherwise.
pub fn product_gaussian_cdf(x: f64, spec: ProductGaussianSpec, tol: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x <= CDF_EPS {
        return Ok(head_mass(spec.rho) * x / CDF_EPS);
    }
    if spec.is_degenerate() {
        return Ok(special::chi2_1_cdf(x));
    }
    let rho = spec.rho;
    let body = quadrature::integrate(
        |u| 2.0 * u * density_unchecked(u * u, rho),
        CDF_EPS.sqrt(),
        x.min(CDF_XMAX).sqrt(),
        tol,
    )?;
    Ok(head_mass(rho) + body)
}

/// Median of `|uv|`: bisection on the quadrature CDF until `|F(θ) - 1/2| <= tol`.
pub fn product_gaussian_median(spec: ProductGaussianSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance {tol} must be positive"));
    }
    let quad_tol = (0.1 * tol).max(1e-14);
    let (mut lo, mut hi) = (CDF_EPS, CDF_XMAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = product_gaussian_cdf(mid, spec, quad_tol)?;
        if (f - 0.5).abs() <= tol {
            return Ok(mid);
        }
        if f < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NumericalFailure(format!(
        "median bisection did not reach tolerance {tol:e}"
    )))
}

/// `p`-quantile of the χ²₁ distribution to absolute tolerance 1e-12.
pub fn chi_square_quantile(p: f64) -> Result<f64> {
    check_level(p)?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while special::chi2_1_cdf(hi) < p {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if special::chi2_1_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
