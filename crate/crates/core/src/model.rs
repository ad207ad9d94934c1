//! Problem generation: signals, Gaussian sensing ensembles, clean intensity
//! measurements and the corruption pipeline (Poisson counts, dense bounded
//! noise, sparse outliers).
//!
//! Magnitudes in [`CorruptionSpec`] are relative to `‖x‖²`, matching how the
//! experiments are parameterized.

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};
use crate::rng::{derive_tagged, seeded, Rng};

/// A real signal or iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector(Vec<f64>);

impl SignalVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("signal must have at least one entry");
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return invalid("signal entries must be finite");
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
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

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SignalVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Measurement vectors `a_i` stored row-major as an `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    m: usize,
    n: usize,
    data: Vec<f64>,
    seed: u64,
}

impl SensingEnsemble {
    /// Wraps an explicit row-major matrix. `seed` is provenance only.
    pub fn from_rows(m: usize, n: usize, data: Vec<f64>, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return invalid("ensemble dimensions must be positive");
        }
        if data.len() != m * n {
            return invalid(format!("expected {} entries, got {}", m * n, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("ensemble entries must be finite");
        }
        Ok(Self { m, n, data, seed })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n)
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return invalid(format!("vector length {len} does not match n = {}", self.n));
        }
        Ok(())
    }

    pub fn check_measurements(&self, len: usize) -> Result<()> {
        if len != self.m {
            return invalid(format!("{len} measurements for m = {} rows", self.m));
        }
        Ok(())
    }

    /// `A·z`
    pub fn forward(&self, z: &[f64]) -> Vec<f64> {
        self.rows().map(|a| dot(a, z)).collect()
    }
}

fn standard_normals(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Draws `x ~ N(0, I_n)`.
pub fn sample_signal(n: usize, seed: u64) -> Result<SignalVector> {
    if n == 0 {
        return invalid("signal dimension must be positive");
    }
    SignalVector::new(standard_normals(&mut seeded(seed), n))
}

/// Draws `m` i.i.d. `N(0, I_n)` measurement vectors.
pub fn sample_ensemble(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    if n == 0 || m == 0 {
        return invalid("ensemble dimensions must be positive");
    }
    let data = standard_normals(&mut seeded(seed), m * n);
    SensingEnsemble::from_rows(m, n, data, seed)
}

/// `y_i = (a_iᵀx)²`
pub fn clean_measurements(ensemble: &SensingEnsemble, x: &[f64]) -> Result<Vec<f64>> {
    ensemble.check_dim(x.len())?;
    Ok(ensemble.rows().map(|a| dot(a, x).powi(2)).collect())
}

/// Which norm of `w` sets the outlier value under [`OutlierModel::NormBernoulli`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseNorm {
    #[default]
    L2,
    LInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OutlierModel {
    /// `η_i ~ U(0, η_max)`, `η_max = eta_max_rel·‖x‖²`; with `symmetric` a
    /// random sign is applied.
    Uniform { eta_max_rel: f64, symmetric: bool },
    /// `η_i = ‖w‖`, the norm of the dense noise vector.
    NormBernoulli { norm: NoiseNorm },
    /// `η_i = round(‖x‖²·U(0,1))`.
    IntegerUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Each index corrupted independently with probability `s`.
    #[default]
    Bernoulli,
    /// Exactly `⌊s·m⌋` distinct indices, uniformly chosen.
    ExactCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub outlier_fraction: f64,
    pub outlier_model: OutlierModel,
    pub placement: Placement,
    pub w_max_rel: f64,
    pub poisson: bool,
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl CorruptionSpec {
    /// No corruption at all.
    pub fn none() -> Self {
        Self {
            outlier_fraction: 0.0,
            outlier_model: OutlierModel::Uniform { eta_max_rel: 0.0, symmetric: false },
            placement: Placement::Bernoulli,
            w_max_rel: 0.0,
            poisson: false,
        }
    }

    /// Uniform nonnegative outliers with Bernoulli placement.
    pub fn uniform_outliers(s: f64, eta_max_rel: f64) -> Self {
        Self {
            outlier_fraction: s,
            outlier_model: OutlierModel::Uniform { eta_max_rel, symmetric: false },
            ..Self::none()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.outlier_fraction;
        if !(0.0..0.5).contains(&s) {
            return invalid(format!("outlier fraction {s} must lie in [0, 0.5)"));
        }
        if !(self.w_max_rel >= 0.0) || !self.w_max_rel.is_finite() {
            return invalid(format!("w_max {} must be finite and >= 0", self.w_max_rel));
        }
        if let OutlierModel::Uniform { eta_max_rel, .. } = self.outlier_model {
            if !(eta_max_rel >= 0.0) || !eta_max_rel.is_finite() {
                return invalid(format!("eta_max {eta_max_rel} must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn exact_count(&self, m: usize) -> usize {
        ((self.outlier_fraction * m as f64) + 1e-9).floor() as usize
    }
}

/// Observed intensities with the corruption bookkeeping.
///
/// `y[i] == (base[i] + noise[i]) + outliers[i]` holds exactly, where `base`
/// is the clean intensity or its Poisson draw.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
    pub base: Vec<f64>,
    pub noise: Vec<f64>,
    pub outliers: Vec<f64>,
    pub outlier_support: Vec<usize>,
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Poisson variate with the given mean (rand_distr: Knuth below 12, transformed
/// rejection above); `0` for a nonpositive mean. Means
/// beyond the sampler's range (about 1.8e19) return the rounded mean.
pub fn sample_poisson(rng: &mut Rng, mean: f64) -> f64 {
    if !(mean > 0.0) {
        return 0.0;
    }
    Poisson::new(mean).map_or(mean.round(), |d| d.sample(rng))
}

/// Applies the corruption pipeline to clean intensities.
///
/// Order: Poisson resampling, then dense noise `w_i ~ U(0, w_max)`, then
/// outliers on the sampled support. Each stage draws from its own sub-stream
/// of `seed`.
pub fn apply_corruption(
    clean: &[f64],
    spec: &CorruptionSpec,
    x_norm: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    spec.validate()?;
    let m = clean.len();
    let x2 = x_norm * x_norm;
    let needs_scale = spec.w_max_rel > 0.0
        || (spec.outlier_fraction > 0.0
            && !matches!(spec.outlier_model, OutlierModel::NormBernoulli { .. }));
    if needs_scale && !(x_norm > 0.0) {
        return invalid("relative corruption magnitudes need a nonzero signal norm");
    }

    let base: Vec<f64> = if spec.poisson {
        let mut r = seeded(derive_tagged(seed, "poisson"));
        clean.iter().map(|&c| sample_poisson(&mut r, c)).collect()
    } else {
        clean.to_vec()
    };

    let noise: Vec<f64> = if spec.w_max_rel > 0.0 {
        let w_max = spec.w_max_rel * x2;
        let mut r = seeded(derive_tagged(seed, "dense-noise"));
        (0..m).map(|_| r.random::<f64>() * w_max).collect()
    } else {
        vec![0.0; m]
    };

    let support: Vec<usize> = if spec.outlier_fraction > 0.0 {
        let mut r = seeded(derive_tagged(seed, "support"));
        match spec.placement {
            Placement::Bernoulli => (0..m)
                .filter(|_| r.random::<f64>() < spec.outlier_fraction)
                .collect(),
            Placement::ExactCount => {
                let mut idx = index::sample(&mut r, m, spec.exact_count(m).min(m)).into_vec();
                idx.sort_unstable();
                idx
            }
        }
    } else {
        Vec::new()
    };

    let mut outliers = vec![0.0; m];
    let mut r = seeded(derive_tagged(seed, "outlier-values"));
    let noise_norm = |kind: NoiseNorm| match kind {
        NoiseNorm::L2 => norm(&noise),
        NoiseNorm::LInf => noise.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
    };
    for &i in &support {
        outliers[i] = match spec.outlier_model {
            OutlierModel::Uniform { eta_max_rel, symmetric } => {
                let v = r.random::<f64>() * eta_max_rel * x2;
                if symmetric && r.random::<bool>() {
                    -v
                } else {
                    v
                }
            }
            OutlierModel::NormBernoulli { norm } => noise_norm(norm),
            OutlierModel::IntegerUniform => (x2 * r.random::<f64>()).round(),
        };
    }

    let y = (0..m).map(|i| (base[i] + noise[i]) + outliers[i]).collect();
    Ok(MeasurementSet { y, base, noise, outliers, outlier_support: support })
}

/// Seeds of the three independent components of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSeeds {
    pub signal: u64,
    pub ensemble: u64,
    pub corruption: u64,
}

impl SubSeeds {
    /// `derive(master, tag)` for the tags `signal`, `ensemble`, `corruption`.
    pub fn from_master(master_seed: u64) -> Self {
        Self {
            signal: derive_tagged(master_seed, "signal"),
            ensemble: derive_tagged(master_seed, "ensemble"),
            corruption: derive_tagged(master_seed, "corruption"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub signal: SignalVector,
    pub ensemble: SensingEnsemble,
    pub measurements: MeasurementSet,
    pub spec: CorruptionSpec,
    pub master_seed: u64,
    pub seeds: SubSeeds,
}

impl ProblemInstance {
    /// Builds an instance from an explicit signal and ensemble.
    pub fn assemble(
        signal: SignalVector,
        ensemble: SensingEnsemble,
        spec: CorruptionSpec,
        master_seed: u64,
        seeds: SubSeeds,
    ) -> Result<Self> {
        let clean = clean_measurements(&ensemble, signal.as_slice())?;
        let measurements = apply_corruption(&clean, &spec, signal.norm(), seeds.corruption)?;
        Ok(Self { signal, ensemble, measurements, spec, master_seed, seeds })
    }

    pub fn n(&self) -> usize {
        self.ensemble.n()
    }

    pub fn m(&self) -> usize {
        self.ensemble.m()
    }

    pub fn y(&self) -> &[f64] {
        &self.measurements.y
    }

    pub fn descriptor(&self) -> InstanceDescriptor {
        InstanceDescriptor {
            n: self.n(),
            m: self.m(),
            master_seed: self.master_seed,
            seeds: self.seeds,
            spec: self.spec,
        }
    }
}

/// Generates a full instance from `master_seed`; see [`SubSeeds::from_master`].
pub fn generate_problem(
    n: usize,
    m: usize,
    spec: &CorruptionSpec,
    master_seed: u64,
) -> Result<ProblemInstance> {
    spec.validate()?;
    generate_with_seeds(n, m, spec, master_seed, SubSeeds::from_master(master_seed))
}

fn generate_with_seeds(
    n: usize,
    m: usize,
    spec: &CorruptionSpec,
    master_seed: u64,
    seeds: SubSeeds,
) -> Result<ProblemInstance> {
    let signal = sample_signal(n, seeds.signal)?;
    if signal.norm() == 0.0 {
        return Err(Error::DegenerateMeasurements("sampled a zero signal".into()));
    }
    let ensemble = sample_ensemble(n, m, seeds.ensemble)?;
    ProblemInstance::assemble(signal, ensemble, *spec, master_seed, seeds)
}

/// JSON layout of an instance: dimensions, seeds and corruption spec.
/// Matrices are regenerated from the seeds, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub n: usize,
    pub m: usize,
    pub master_seed: u64,
    pub seeds: SubSeeds,
    pub spec: CorruptionSpec,
}

impl InstanceDescriptor {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("bad descriptor: {e}")))
    }

    pub fn regenerate(&self) -> Result<ProblemInstance> {
        self.spec.validate()?;
        generate_with_seeds(self.n, self.m, &self.spec, self.master_seed, self.seeds)
    }
}
