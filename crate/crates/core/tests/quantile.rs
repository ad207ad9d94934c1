mod common;

use common::{normals, sorted};
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::StandardNormal;
use robust_phase::quantile::*;
use robust_phase::rng::seeded;

/// K0(x) = ∫₀^∞ exp(−x·cosh t) dt by the trapezoid rule.
fn k0_oracle(x: f64) -> f64 {
    let h = 1.0 / 512.0;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh()).exp();
        sum += term;
        if term < 1e-30 {
            break;
        }
        t += h;
    }
    sum * h
}

/// ∫₀^∞ ψ_ρ by composite Simpson in u = √x on (0, 7].
fn simpson_mass(spec: ProductGaussianSpec) -> f64 {
    let (a, b, k) = (0.0_f64, 7.0_f64, 400_000usize);
    let h = (b - a) / k as f64;
    let f = |u: f64| {
        if u <= 0.0 {
            return if spec.rho().abs() == 1.0 { 2.0 / (2.0 * std::f64::consts::PI).sqrt() } else { 0.0 };
        }
        2.0 * u * product_gaussian_density(u * u, spec).unwrap()
    };
    let mut s = f(a) + f(b);
    for i in 1..k {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn density_examples_match_oracles() {
    let s0 = ProductGaussianSpec::new(0.0).unwrap();
    let expected = 2.0 / std::f64::consts::PI * k0_oracle(1.0);
    let got = product_gaussian_density(1.0, s0).unwrap();
    assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    assert!((got - 0.268_032_482).abs() < 1e-8);

    let s1 = ProductGaussianSpec::new(1.0).unwrap();
    let theta = chi_square_quantile(0.5).unwrap();
    let closed = (-theta / 2.0).exp() / (2.0 * std::f64::consts::PI * theta).sqrt();
    let got = product_gaussian_density(theta, s1).unwrap();
    assert!((got - closed).abs() < 1e-14);
    assert!((got - 0.471_136).abs() < 1e-5);
}

#[test]
fn density_integrates_to_one() {
    for rho in [0.0, 0.5, 0.9, 1.0] {
        let spec = ProductGaussianSpec::new(rho).unwrap();
        let simpson = simpson_mass(spec);
        assert!((simpson - 1.0).abs() < 1e-4, "rho {rho}: Simpson mass {simpson}");
        let quad = product_gaussian_cdf(CDF_XMAX, spec, 1e-12).unwrap();
        assert!((quad - 1.0).abs() < 1e-4, "rho {rho}: quadrature mass {quad}");
    }
}

#[test]
fn density_matches_bessel_form_for_intermediate_rho() {
    for &rho in &[0.3, 0.75] {
        let spec = ProductGaussianSpec::new(rho).unwrap();
        for &x in &[0.05, 0.7, 2.5] {
            let s2: f64 = 1.0 - rho * rho;
            let direct = ((rho * x / s2).exp() + (-rho * x / s2).exp()) * k0_oracle(x / s2)
                / (std::f64::consts::PI * s2.sqrt());
            let got = product_gaussian_density(x, spec).unwrap();
            assert!((got - direct).abs() <= 1e-9 * direct, "rho {rho}, x {x}: {got} vs {direct}");
        }
    }
}

#[test]
fn median_at_zero_correlation_matches_monte_carlo() {
    let mut rng = seeded(404);
    let n = 10_000_000;
    let mut prods: Vec<f64> = (0..n)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            (u * v).abs()
        })
        .collect();
    let k = n / 2;
    let mc = *prods.select_nth_unstable_by(k - 1, f64::total_cmp).1;
    let spec = ProductGaussianSpec::new(0.0).unwrap();
    let theta = product_gaussian_median(spec, 1e-9).unwrap();
    // standard error of the sample median: 0.5/(√n·ψ(θ)) ≈ 2e-4
    assert!((theta - mc).abs() < 1e-3, "quadrature {theta} vs Monte-Carlo {mc}");
    assert!(theta > 0.348 && theta < 0.455);
}

#[test]
fn median_sweep_within_stated_bounds() {
    for rho in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let theta = product_gaussian_median(ProductGaussianSpec::new(rho).unwrap(), 1e-9).unwrap();
        assert!(theta > 0.348 && theta < 0.455, "rho {rho}: {theta}");
    }
    let theta = product_gaussian_median(ProductGaussianSpec::new(1.0).unwrap(), 1e-9).unwrap();
    assert!((theta - 0.4549).abs() < 1e-3);
}

#[test]
fn sample_median_concentrates() {
    let m = 100_000;
    let mut close = 0;
    for rep in 0..100 {
        let mut rng = seeded(9_000 + rep);
        let xs: Vec<f64> = normals(&mut rng, m).iter().map(|v| v * v).collect();
        let med = sample_median(&SampleBuffer::new(xs).unwrap()).unwrap();
        if (med - 0.4549).abs() < 0.01 {
            close += 1;
        }
    }
    assert!(close >= 99, "{close}/100 within 0.01 of 0.4549");
}

#[test]
fn order_statistic_perturbation_suite() {
    let c = common::order_statistic_perturbation(1000, 17);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn contamination_sandwich_suite() {
    let c = common::contamination_sandwich(1000, 23);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn median_equals_half_quantile() {
    let b = SampleBuffer::new(vec![4.0, -1.0, 9.0, 2.0, 2.0, 7.0]).unwrap();
    assert_eq!(sample_median(&b).unwrap(), sample_quantile(&b, 0.5).unwrap());
    assert_eq!(sample_median(&b).unwrap(), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quantile_is_sorted_order_statistic(
        xs in prop::collection::vec(-1e6f64..1e6, 1..120),
        p in 0.001f64..0.999,
    ) {
        let s = sorted(&xs);
        let k = quantile_rank(xs.len(), p);
        prop_assert!(k as f64 / xs.len() as f64 >= p - 1e-12);
        prop_assert!(k == 1 || ((k - 1) as f64) / (xs.len() as f64) < p);
        let got = sample_quantile(&SampleBuffer::new(xs).unwrap(), p).unwrap();
        prop_assert_eq!(got, s[k - 1]);
    }

    #[test]
    fn quantile_is_permutation_invariant(
        xs in prop::collection::vec(-1e3f64..1e3, 1..80),
        p in 0.01f64..0.99,
        seed in any::<u64>(),
    ) {
        let mut shuffled = xs.clone();
        let mut rng = seeded(seed);
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let a = sample_quantile(&SampleBuffer::new(xs).unwrap(), p).unwrap();
        let b = sample_quantile(&SampleBuffer::new(shuffled).unwrap(), p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn quantile_is_monotone_in_p(
        xs in prop::collection::vec(-1e3f64..1e3, 1..80),
        p in 0.01f64..0.98,
        dp in 0.0f64..0.5,
    ) {
        let q = (p + dp).min(0.99);
        let b = SampleBuffer::new(xs).unwrap();
        prop_assert!(sample_quantile(&b, p).unwrap() <= sample_quantile(&b, q).unwrap());
    }

    #[test]
    fn order_statistics_are_one_lipschitz(
        pair in (1usize..200).prop_flat_map(|m| (
            prop::collection::vec(-10f64..10.0, m),
            prop::collection::vec(-10f64..10.0, m),
        )),
    ) {
        let (x, y) = pair;
        let sup = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (sx, sy) = (sorted(&x), sorted(&y));
        for k in 0..x.len() {
            prop_assert!((sx[k] - sy[k]).abs() <= sup);
        }
    }

    #[test]
    fn density_is_even_and_positive(rho in -0.999f64..0.999, x in 1e-6f64..30.0) {
        let a = product_gaussian_density(x, ProductGaussianSpec::new(rho).unwrap()).unwrap();
        let b = product_gaussian_density(x, ProductGaussianSpec::new(-rho).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a > 0.0 && a.is_finite());
    }
}
