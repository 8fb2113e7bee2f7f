mod common;

use common::integrate;
use reid_temporal::prior::{sample_prior, Family, PriorSpec};

fn zoo() -> Vec<PriorSpec> {
    let mut specs = PriorSpec::airport_fitted();
    specs.push(PriorSpec::exponential(-0.1, 3.0).unwrap());
    specs.push(PriorSpec::box_uniform(0.0, 30.0).unwrap());
    specs.push(PriorSpec::gamma(2.0, 0.0, 3.0).unwrap());
    specs.push(PriorSpec::student_t(4.5, -2.0, 0.7).unwrap());
    specs.push(PriorSpec::weibull_min(2.5, 1.0, 4.0).unwrap());
    specs
}

#[test]
fn quadrature_oracle_sanity() {
    let i = integrate(&|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, None);
    assert!((i - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    let i = integrate(&|x: f64| 1.0 / x.sqrt(), 0.0, 4.0, None);
    assert!((i - 4.0).abs() < 1e-8);
    let i = integrate(&|x: f64| 1.0 / (1.0 + x * x), 0.0, f64::INFINITY, None);
    assert!((i - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn every_density_integrates_to_one() {
    for spec in zoo() {
        let (lo, hi) = spec.support();
        let mass = integrate(&|x| spec.pdf(x), lo, hi, Some(spec.loc()));
        assert!((mass - 1.0).abs() < 1e-3, "{:?}: {mass}", spec);
    }
}

#[test]
fn mean_of_sampled_gamma_matches_quadrature_mean() {
    let spec = PriorSpec::gamma(2.0, 0.5, 3.0).unwrap();
    let (lo, hi) = spec.support();
    let mean = integrate(&|x| x * spec.pdf(x), lo, hi, None);
    assert!((mean - 6.5).abs() < 1e-8);
    let s = sample_prior(&spec, 20_000, 3).unwrap();
    let m = s.iter().sum::<f64>() / s.len() as f64;
    // sd of the mean is sqrt(2 * 9 / 20000) ~ 0.03
    assert!((m - mean).abs() < 0.12, "{m}");
}

#[test]
fn cdf_by_quadrature_matches_closed_forms() {
    let e = PriorSpec::exponential(1.0, 2.0).unwrap();
    let c = integrate(&|x| e.pdf(x), 1.0, 3.0, None);
    assert!((c - (1.0 - (-1f64).exp())).abs() < 1e-10);
    let l = PriorSpec::laplace(0.0, 1.0).unwrap();
    let c = integrate(&|x| l.pdf(x), f64::NEG_INFINITY, 0.0, None);
    assert!((c - 0.5).abs() < 1e-10);
    let w = PriorSpec::weibull_min(0.74, -0.1, 2.2).unwrap();
    let c = integrate(&|x| w.pdf(x), -0.1, 2.1, None);
    assert!((c - (1.0 - (-1f64).exp())).abs() < 1e-8);
    let k = PriorSpec::cauchy(0.9, 0.633).unwrap();
    let c = integrate(&|x| k.pdf(x), 0.9, 0.9 + 0.633, None);
    assert!((c - 0.25).abs() < 1e-10);
}

#[test]
fn families_cover_the_zoo() {
    let fams: std::collections::BTreeSet<Family> = zoo().iter().map(|s| s.family()).collect();
    assert_eq!(fams.len(), Family::ALL.len());
}
