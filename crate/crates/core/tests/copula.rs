mod common;

use common::{kendall_tau, ks_uniform};
use ordtune_core::copula::{
    estimate_nu, frank_conditional_cdf, gaussian_conditional_cdf, sample_frank_copula,
    sample_gaussian_copula, CopulaFamily, CopulaModel, KendallRhoPair,
};
use ordtune_core::num::Quadrature;

const N: usize = 100_000;

fn ks_limit() -> f64 {
    1.63 / (N as f64).sqrt()
}

#[test]
fn gaussian_marginals_are_uniform() {
    for &rho in &[0.0, 0.5, 0.9792, -0.7] {
        let s = sample_gaussian_copula(rho, N, 17).unwrap();
        let u: Vec<f64> = s.iter().map(|p| p.0).collect();
        let v: Vec<f64> = s.iter().map(|p| p.1).collect();
        assert!(ks_uniform(&u) < ks_limit(), "rho {rho} u");
        assert!(ks_uniform(&v) < ks_limit(), "rho {rho} v");
    }
}

#[test]
fn frank_marginals_are_uniform() {
    for &lambda in &[-4.0, 2.0, 5.0, 10.0] {
        let s = sample_frank_copula(lambda, N, 23).unwrap();
        let u: Vec<f64> = s.iter().map(|p| p.0).collect();
        let v: Vec<f64> = s.iter().map(|p| p.1).collect();
        assert!(ks_uniform(&u) < ks_limit(), "lambda {lambda} u");
        assert!(ks_uniform(&v) < ks_limit(), "lambda {lambda} v");
    }
}

#[test]
fn sample_kendall_matches_theory() {
    // sd of the sample Kendall correlation at N = 1e5 is below 3e-3
    for fam in [
        CopulaFamily::gaussian(0.5).unwrap(),
        CopulaFamily::gaussian(0.9792).unwrap(),
        CopulaFamily::frank(5.0).unwrap(),
        CopulaFamily::frank(-3.0).unwrap(),
    ] {
        let s = CopulaModel::new(fam, 5).sample(N);
        let k = kendall_tau(&s);
        assert!((k - fam.kendall()).abs() < 0.01, "{fam:?}: {k} vs {}", fam.kendall());
    }
}

#[test]
fn merge_sort_kendall_matches_quadratic_count() {
    let s = CopulaModel::new(CopulaFamily::gaussian(0.3).unwrap(), 8).sample(400);
    let fast = kendall_tau(&s);
    let sample = ordtune_core::BivariateSample::from_pairs(0.5, s.iter().copied());
    assert!((fast - sample.kappa_hat()).abs() < 1e-12);
}

#[test]
fn streams_are_reproducible() {
    let a = sample_frank_copula(5.0, 1000, 99).unwrap();
    let b = sample_frank_copula(5.0, 1000, 99).unwrap();
    let c = sample_frank_copula(5.0, 1000, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn definition_round_trip() {
    for i in 1..=9 {
        let rho = i as f64 / 10.0;
        let kappa = 2.0 / std::f64::consts::PI * rho.asin();
        assert!(((std::f64::consts::PI * kappa / 2.0).sin() - rho).abs() < 1e-12);
        assert!((KendallRhoPair::from_kappa(kappa).rho - rho).abs() < 1e-12);
    }
}

#[test]
fn conditional_cdfs_integrate_to_marginal() {
    let q = Quadrature::standard();
    for &x in &[0.05, 0.3, 0.7] {
        for &rho in &[0.3, 0.9] {
            let v = q.integrate(0.0, 1.0, |z| gaussian_conditional_cdf(x, z, rho));
            assert!((v - x).abs() < 1e-6, "gaussian x {x} rho {rho}: {v}");
        }
        let v = q.integrate(0.0, 1.0, |u| frank_conditional_cdf(x, u, 5.0));
        assert!((v - x).abs() < 1e-6, "frank x {x}: {v}");
    }
}

#[test]
fn nu_for_frank_grows_under_refinement() {
    let fam = CopulaFamily::frank(5.0).unwrap();
    let coarse = estimate_nu(&fam, 100).unwrap();
    let fine = estimate_nu(&fam, 500).unwrap();
    assert!(coarse.nu > 0.0);
    assert!(fine.nu >= coarse.nu);
    // the gap is largest towards z = 0
    assert!(fine.at_z < coarse.at_z);
    assert!(fine.nu < 1.0);
}

#[test]
fn frank_gap_approaches_one_in_the_corner() {
    // near z = 0 the Gaussian conditional tends to 1 for any x > 0, while the
    // Frank conditional tends to (1 - e^{-lambda x}) / (1 - e^{-lambda})
    let fam = CopulaFamily::frank(5.0).unwrap();
    let rho = fam.associated_rho();
    let (z, x) = (1e-12, 1e-3);
    let gap = gaussian_conditional_cdf(x, z, rho) - frank_conditional_cdf(x, z, 5.0);
    let limit = 1.0 - (-(-5.0 * x).exp_m1()) / (-(-5.0f64).exp_m1());
    assert!(gap > 0.9, "{gap}");
    assert!(gap < limit);
}

#[test]
fn nu_for_gaussian_is_zero() {
    let est = estimate_nu(&CopulaFamily::gaussian(0.8).unwrap(), 200).unwrap();
    assert_eq!(est.nu, 0.0);
    assert!(estimate_nu(&CopulaFamily::gaussian(0.8).unwrap(), 50).is_err());
}
