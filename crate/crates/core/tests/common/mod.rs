//! Checks shared by the property suites and the acceptance target. Each one
//! returns a verdict with a short description of what was measured.

#![allow(dead_code)]

use rand::Rng as _;
use rand_distr::StandardNormal;
use robust_phase::metrics::{residual_median_stats, sign_flip_fraction, ResidualKind};
use robust_phase::model::{sample_ensemble, sample_signal, SensingEnsemble};
use robust_phase::quantile::{sample_quantile, SampleBuffer};
use robust_phase::rng::{seeded, Rng};
use robust_phase::solvers::{gradient, validate_twf_params, Algorithm, SolverConfig};

pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Prints one verdict line and returns whether it passed.
pub fn report(label: &str, check: &Check) -> bool {
    let tag = if check.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {label}: {}", check.detail);
    check.pass
}

pub fn normals(rng: &mut Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sorted copy; the k-th order statistic (1-based) is `sorted[k - 1]`.
pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Reference quantile by full sort: the ⌈p·m⌉-th order statistic.
pub fn sort_quantile(v: &[f64], p: f64) -> f64 {
    let s = sorted(v);
    let k = ((p * s.len() as f64) - 1e-12).ceil().max(1.0) as usize;
    s[k.min(s.len()) - 1]
}

/// A point `z = x + d·u` (u a random unit vector) with `‖z − x‖ = ratio·‖z‖`
/// when `rel_to_z`, or `‖z − x‖ = ratio·‖x‖` otherwise.
pub fn point_at_ratio(x: &[f64], rng: &mut Rng, ratio: f64, rel_to_z: bool) -> Vec<f64> {
    let mut u = normals(rng, x.len());
    let un = norm(&u);
    u.iter_mut().for_each(|v| *v /= un);
    let (xu, xx) = (dot(x, &u), dot(x, x));
    let d = if rel_to_z {
        // d² = ratio²(xx + 2d·xu + d²)
        let k = 1.0 / (ratio * ratio) - 1.0;
        (2.0 * xu + (4.0 * xu * xu + 4.0 * k * xx).sqrt()) / (2.0 * k)
    } else {
        ratio * xx.sqrt()
    };
    x.iter().zip(&u).map(|(a, b)| a + d * b).collect()
}

/// |X_(k) − Y_(k)| ≤ ‖X − Y‖_∞ for every k, over random pairs.
pub fn order_statistic_perturbation(pairs: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let m = rng.random_range(1..=200);
        let x = normals(&mut rng, m);
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let y: Vec<f64> = if rng.random_bool(0.5) {
            x.iter().map(|v| v + scale * rng.sample::<f64, _>(StandardNormal)).collect()
        } else {
            normals(&mut rng, m)
        };
        let sup = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (bx, by) = (SampleBuffer::new(x).unwrap(), SampleBuffer::new(y).unwrap());
        for k in 1..=m {
            let p = (k as f64 - 0.5) / m as f64;
            let gap = (sample_quantile(&bx, p).unwrap() - sample_quantile(&by, p).unwrap()).abs();
            if gap > sup {
                return Check::new(false, format!("m={m}, k={k}: gap {gap:e} > sup {sup:e}"));
            }
            if sup > 0.0 {
                worst = worst.max(gap / sup);
            }
        }
    }
    Check::new(true, format!("{pairs} pairs, max gap/sup = {worst:.3}"))
}

/// θ_{p−s}(clean) ≤ θ_p(contaminated) ≤ θ_{p+s}(clean) at p = 1/2 with
/// ⌊s·m⌋ entries replaced by ±1e9.
pub fn contamination_sandwich(cases: usize, seed: u64) -> Check {
    let mut rng = seeded(seed);
    for case in 0..cases {
        let m = rng.random_range(10..=400);
        let s = rng.random_range(0.001..0.4);
        let clean: Vec<f64> = normals(&mut rng, m).iter().map(|v| v * v).collect();
        let k = (s * m as f64).floor() as usize;
        let mut dirty = clean.clone();
        let mode = case % 3;
        for (j, i) in rand::seq::index::sample(&mut rng, m, k).into_iter().enumerate() {
            dirty[i] = match mode {
                0 => 1e9,
                1 => -1e9,
                _ if j % 2 == 0 => 1e9,
                _ => -1e9,
            };
        }
        let clean_buf = SampleBuffer::new(clean).unwrap();
        let lo = sample_quantile(&clean_buf, 0.5 - s).unwrap();
        let hi = sample_quantile(&clean_buf, 0.5 + s).unwrap();
        let mid = sample_quantile(&SampleBuffer::new(dirty).unwrap(), 0.5).unwrap();
        if !(lo <= mid && mid <= hi) {
            return Check::new(false, format!("case {case}: m={m}, s={s:.3}: {lo} <= {mid} <= {hi} fails"));
        }
    }
    Check::new(true, format!("{cases} contaminations (all +1e9, all -1e9, mixed)"))
}

/// Kept set of a truncated gradient, recomputed from the definitions with a
/// full sort.
pub fn oracle_mask(alg: Algorithm, a: &SensingEnsemble, y: &[f64], z: &[f64], cfg: &SolverConfig) -> Vec<bool> {
    let m = y.len();
    let az: Vec<f64> = a.rows().map(|r| dot(r, z)).collect();
    let nz = norm(z);
    match alg {
        Algorithm::PlainRWF => vec![true; m],
        Algorithm::MedianRWF => {
            let r: Vec<f64> = (0..m).map(|i| (y[i].max(0.0).sqrt() - az[i].abs()).abs()).collect();
            let med = sort_quantile(&r, 0.5);
            r.iter().map(|v| *v <= cfg.alpha_h_prime * med).collect()
        }
        _ => {
            let r: Vec<f64> = (0..m).map(|i| (y[i] - az[i] * az[i]).abs()).collect();
            let mut eligible = vec![true; m];
            let stat = match alg {
                Algorithm::MedianTWF => sort_quantile(&r, 0.5),
                Algorithm::MeanTWF => r.iter().sum::<f64>() / m as f64,
                _ => {
                    let s = cfg.known_s.unwrap();
                    let drop = ((s * m as f64) - 1e-9).ceil() as usize;
                    let mut order: Vec<usize> = (0..m).collect();
                    order.sort_by(|&i, &j| r[j].total_cmp(&r[i]).then(i.cmp(&j)));
                    for &i in &order[..drop] {
                        eligible[i] = false;
                    }
                    let kept: Vec<f64> = (0..m).filter(|&i| eligible[i]).map(|i| r[i]).collect();
                    kept.iter().sum::<f64>() / kept.len() as f64
                }
            };
            (0..m)
                .map(|i| {
                    let t = az[i].abs();
                    eligible[i]
                        && cfg.alpha_l * nz <= t
                        && t <= cfg.alpha_u * nz
                        && r[i] <= cfg.alpha_h * stat * t / nz
                })
                .collect()
        }
    }
}

/// Poisson loss (TWF family) or reshaped loss (RWF family) restricted to `mask`.
pub fn frozen_loss(alg: Algorithm, a: &SensingEnsemble, y: &[f64], z: &[f64], mask: &[bool]) -> f64 {
    let m = y.len() as f64;
    let mut total = 0.0;
    for (i, row) in a.rows().enumerate() {
        if !mask[i] {
            continue;
        }
        let t = dot(row, z);
        total += if alg.is_reshaped() {
            (t.abs() - y[i].max(0.0).sqrt()).powi(2)
        } else {
            t * t - y[i] * (t * t).ln()
        };
    }
    total / (2.0 * m)
}

/// Central differences of the frozen-mask loss against the analytic gradient.
pub fn finite_difference_gradients(points: usize, seed: u64) -> Check {
    let (n, m) = (10, 100);
    let mut rng = seeded(seed);
    let mut worst: Vec<(Algorithm, f64)> = Vec::new();
    for alg in Algorithm::ALL {
        let mut cfg = SolverConfig::new(alg);
        if alg == Algorithm::TrimeanTWF {
            cfg = cfg.with_known_s(0.1);
        }
        let mut max_rel: f64 = 0.0;
        let mut done = 0;
        while done < points {
            let a = sample_ensemble(n, m, rng.random()).unwrap();
            let mut x = normals(&mut rng, n);
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v *= 10.0 / nx);
            let mut y: Vec<f64> = a.rows().map(|r| dot(r, &x).powi(2)).collect();
            for v in y.iter_mut() {
                if rng.random_bool(0.1) {
                    *v += rng.random_range(0.0..500.0);
                }
            }
            let spread = rng.random_range(0.05..0.8);
            let z: Vec<f64> = x.iter().map(|v| v + spread * 10.0 / (n as f64).sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
            if a.rows().any(|r| dot(r, &z).abs() <= 0.1) {
                continue;
            }
            let mask = oracle_mask(alg, &a, &y, &z, &cfg);
            let eval = gradient(&a, &y, &z, &cfg).unwrap();
            let kept = mask.iter().filter(|k| **k).count();
            if kept != eval.kept {
                return Check::new(false, format!("{alg}: kept {} vs oracle {kept}", eval.kept));
            }
            if kept == 0 {
                continue;
            }
            let h = 1e-5;
            let fd: Vec<f64> = (0..n)
                .map(|j| {
                    let (mut zp, mut zm) = (z.clone(), z.clone());
                    zp[j] += h;
                    zm[j] -= h;
                    (frozen_loss(alg, &a, &y, &zp, &mask) - frozen_loss(alg, &a, &y, &zm, &mask)) / (2.0 * h)
                })
                .collect();
            let diff: Vec<f64> = fd.iter().zip(&eval.gradient).map(|(p, q)| p - q).collect();
            max_rel = max_rel.max(norm(&diff) / norm(&eval.gradient));
            done += 1;
        }
        worst.push((alg, max_rel));
    }
    let pass = worst.iter().all(|(_, r)| *r <= 1e-5);
    let detail = worst
        .iter()
        .map(|(a, r)| format!("{a} {r:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Check::new(pass, format!("{points} points each, max rel. err: {detail} (limit 1e-5)"))
}

/// Counts seeds (out of `seeds`) for which `pred` holds; passes at `need`.
fn monte_carlo<F: FnMut(u64) -> bool>(seeds: u64, need: u64, mut pred: F) -> (bool, u64) {
    let hits = (0..seeds).filter(|s| pred(*s)).count() as u64;
    (hits >= need, hits)
}

/// Intensity-residual quantiles within [0.55, 1.05]·‖z‖‖z − x‖ at
/// ‖z − x‖ = ‖z‖/20, n = 64, m = 6000.
pub fn intensity_residual_sandwich(seed: u64) -> Check {
    let (n, m) = (64, 6000);
    let (pass, hits) = monte_carlo(100, 95, |s| {
        let mut rng = seeded(seed ^ (s + 1).wrapping_mul(0x9E37_79B9));
        let x = sample_signal(n, rng.random()).unwrap();
        let a = sample_ensemble(n, m, rng.random()).unwrap();
        let z = point_at_ratio(x.as_slice(), &mut rng, 1.0 / 20.0, true);
        let d = norm(&z.iter().zip(x.as_slice()).map(|(p, q)| p - q).collect::<Vec<_>>());
        let q = residual_median_stats(&a, x.as_slice(), &z, ResidualKind::Intensity).unwrap();
        let unit = norm(&z) * d;
        [q.q49, q.median, q.q51].iter().all(|v| (0.55 * unit..=1.05 * unit).contains(v))
    });
    Check::new(pass, format!("{hits}/100 seeds inside [0.55, 1.05]·‖z‖‖z−x‖ (need 95)"))
}

/// Amplitude-residual quantiles within [0.45, 0.85]·‖z − x‖, same regime.
pub fn amplitude_residual_sandwich(seed: u64) -> Check {
    let (n, m) = (64, 6000);
    let (pass, hits) = monte_carlo(100, 95, |s| {
        let mut rng = seeded(seed ^ (s + 1).wrapping_mul(0x85EB_CA6B));
        let x = sample_signal(n, rng.random()).unwrap();
        let a = sample_ensemble(n, m, rng.random()).unwrap();
        let z = point_at_ratio(x.as_slice(), &mut rng, 1.0 / 20.0, true);
        let d = norm(&z.iter().zip(x.as_slice()).map(|(p, q)| p - q).collect::<Vec<_>>());
        let q = residual_median_stats(&a, x.as_slice(), &z, ResidualKind::Amplitude).unwrap();
        [q.q49, q.median, q.q51].iter().all(|v| (0.45 * d..=0.85 * d).contains(v))
    });
    Check::new(pass, format!("{hits}/100 seeds inside [0.45, 0.85]·‖z−x‖ (need 95)"))
}

/// Sign-flip fraction below 0.07 at ‖z − x‖ = ‖x‖/11, n = 64, m = 50n.
pub fn sign_flip_rate(seed: u64) -> Check {
    let n = 64;
    let mut worst: f64 = 0.0;
    let (pass, hits) = monte_carlo(100, 95, |s| {
        let mut rng = seeded(seed ^ (s + 1).wrapping_mul(0xC2B2_AE35));
        let x = sample_signal(n, rng.random()).unwrap();
        let a = sample_ensemble(n, 50 * n, rng.random()).unwrap();
        let z = point_at_ratio(x.as_slice(), &mut rng, 1.0 / 11.0, false);
        let f = sign_flip_fraction(&a, x.as_slice(), &z).unwrap();
        worst = worst.max(f);
        f < 0.07
    });
    Check::new(pass, format!("{hits}/100 seeds below 0.07 (need 95); max fraction {worst:.4}"))
}

/// ζ₁ ≈ 0.24 and ζ₂ ≈ 0.032 (±0.01) at the default thresholds.
pub fn zeta_values() -> Check {
    let r = validate_twf_params(&SolverConfig::new(Algorithm::MedianTWF));
    let pass = (r.zeta1 - 0.24).abs() <= 0.01 && (r.zeta2 - 0.032).abs() <= 0.01 && r.condition_holds;
    Check::new(pass, format!("zeta1 = {:.4}, zeta2 = {:.4}, condition holds = {}", r.zeta1, r.zeta2, r.condition_holds))
}
