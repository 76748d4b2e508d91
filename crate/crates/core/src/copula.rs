//! Bivariate copula families used to generate synthetic `(Z, X)` data, their
//! conditional CDFs, and the `ν` deviation between a copula and its
//! associated Gaussian copula.
//!
//! All samples live on the uniform scale: `u` is the copula coordinate of
//! `Z`, `v` the coordinate of `X`. With uniform marginals the `α`-quantile of
//! `X` is `α` itself.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{quantile_capped, std_normal_cdf, Quadrature};
use crate::rng::{stream, StreamRng};

/// Below this magnitude the Frank parameter is treated as independence.
pub const FRANK_INDEPENDENCE_EPS: f64 = 1e-8;

/// Tolerance of the bisection used to invert the Frank conditional CDF.
const FRANK_INVERSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaFamily {
    Gaussian { rho: f64 },
    Frank { lambda: f64 },
}

impl CopulaFamily {
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!(
                "Gaussian copula needs rho in [-1, 1], got {rho}"
            )));
        }
        Ok(Self::Gaussian { rho })
    }

    pub fn frank(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::Domain(format!(
                "Frank copula needs a finite nonzero lambda, got {lambda}"
            )));
        }
        Ok(Self::Frank { lambda })
    }

    /// Population Kendall correlation.
    pub fn kendall(&self) -> f64 {
        match *self {
            Self::Gaussian { rho } => 2.0 / PI * rho.asin(),
            Self::Frank { lambda } => frank_kendall(lambda),
        }
    }

    /// Correlation of the associated Gaussian copula.
    pub fn associated_rho(&self) -> f64 {
        match *self {
            Self::Gaussian { rho } => rho,
            Self::Frank { .. } => KendallRhoPair::from_kappa(self.kendall()).rho,
        }
    }

    /// `Pr(V ≤ v | U = u)`.
    pub fn conditional_cdf(&self, v: f64, u: f64) -> f64 {
        match *self {
            Self::Gaussian { rho } => gaussian_conditional_cdf(v, u, rho),
            Self::Frank { lambda } => frank_conditional_cdf(v, u, lambda),
        }
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Self::Gaussian { rho } => gaussian_pair(rho, rng),
            Self::Frank { lambda } => {
                let u = open_unit(rng);
                (u, frank_conditional_sample(u, lambda, rng))
            }
        }
    }

    /// Draw `V` from its conditional law given `U = u`.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { rho } => {
                if rho.abs() >= 1.0 {
                    return if rho > 0.0 { u } else { 1.0 - u };
                }
                let e: f64 = rng.sample(StandardNormal);
                std_normal_cdf(rho * quantile_capped(u) + (1.0 - rho * rho).sqrt() * e)
            }
            Self::Frank { lambda } => frank_conditional_sample(u, lambda, rng),
        }
    }
}

/// A copula family together with the seed of its sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaModel {
    pub family: CopulaFamily,
    pub seed: u64,
}

impl CopulaModel {
    pub fn new(family: CopulaFamily, seed: u64) -> Self {
        Self { family, seed }
    }

    pub fn sampler(&self) -> CopulaSampler {
        CopulaSampler {
            family: self.family,
            rng: stream(self.seed, 0),
        }
    }

    pub fn sample(&self, count: usize) -> Vec<(f64, f64)> {
        let mut sampler = self.sampler();
        (0..count).map(|_| sampler.next_pair()).collect()
    }
}

/// Owns a generator; one sampler per thread.
#[derive(Debug, Clone)]
pub struct CopulaSampler {
    family: CopulaFamily,
    rng: StreamRng,
}

impl CopulaSampler {
    pub fn next_pair(&mut self) -> (f64, f64) {
        self.family.sample_pair(&mut self.rng)
    }
}

impl Iterator for CopulaSampler {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_pair())
    }
}

/// Kendall correlation and the Gaussian correlation it maps to,
/// `ρ = sin(π κ / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallRhoPair {
    pub kappa: f64,
    pub rho: f64,
}

impl KendallRhoPair {
    pub fn from_kappa(kappa: f64) -> Self {
        Self {
            kappa,
            rho: (PI * kappa / 2.0).sin(),
        }
    }

    pub fn from_rho(rho: f64) -> Self {
        Self::from_kappa(2.0 / PI * rho.asin())
    }
}

pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn gaussian_pair<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> (f64, f64) {
    let z: f64 = rng.sample(StandardNormal);
    let e: f64 = rng.sample(StandardNormal);
    let x = rho * z + (1.0 - rho * rho).max(0.0).sqrt() * e;
    let u = std_normal_cdf(z);
    // rho = ±1 must give exactly comonotone / countermonotone pairs
    let v = if rho == 1.0 {
        u
    } else if rho == -1.0 {
        1.0 - u
    } else {
        std_normal_cdf(x)
    };
    (u, v)
}

/// `count` i.i.d. pairs from the Gaussian copula with correlation `rho`.
pub fn sample_gaussian_copula(rho: f64, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    Ok(CopulaModel::new(CopulaFamily::gaussian(rho)?, seed).sample(count))
}

/// `count` i.i.d. pairs from the Frank copula, by conditional inversion.
pub fn sample_frank_copula(lambda: f64, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    Ok(CopulaModel::new(CopulaFamily::frank(lambda)?, seed).sample(count))
}

/// `Pr(X̃ ≤ x | Z̃ = z)` under the Gaussian copula with correlation `rho`.
pub fn gaussian_conditional_cdf(x: f64, z: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        return if x >= z { 1.0 } else { 0.0 };
    }
    if rho <= -1.0 {
        return if x >= 1.0 - z { 1.0 } else { 0.0 };
    }
    let qx = quantile_capped(x);
    let qz = quantile_capped(z);
    std_normal_cdf((qx - rho * qz) / (1.0 - rho * rho).sqrt())
}

/// Frank copula CDF `C(u, v)`.
pub fn frank_copula_cdf(u: f64, v: f64, lambda: f64) -> f64 {
    if lambda.abs() < FRANK_INDEPENDENCE_EPS {
        return u * v;
    }
    let a = (-lambda * u).exp_m1();
    let b = (-lambda * v).exp_m1();
    let c = (-lambda).exp_m1();
    -(a * b / c).ln_1p() / lambda
}

/// `∂C/∂u` of the Frank copula: the CDF of `V` given `U = u`, at `v`.
pub fn frank_conditional_cdf(v: f64, u: f64, lambda: f64) -> f64 {
    if lambda.abs() < FRANK_INDEPENDENCE_EPS {
        return v;
    }
    let a = (-lambda * u).exp_m1();
    let b = (-lambda * v).exp_m1();
    let c = (-lambda).exp_m1();
    ((a + 1.0) * b / (c + a * b)).clamp(0.0, 1.0)
}

fn frank_conditional_sample<R: Rng + ?Sized>(u: f64, lambda: f64, rng: &mut R) -> f64 {
    let target = open_unit(rng);
    if lambda.abs() < FRANK_INDEPENDENCE_EPS {
        return target;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > FRANK_INVERSION_TOL {
        let mid = 0.5 * (lo + hi);
        if frank_conditional_cdf(mid, u, lambda) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First Debye function `D₁(λ) = λ⁻¹ ∫₀^λ t / (eᵗ - 1) dt`.
pub fn debye1(lambda: f64) -> f64 {
    if lambda.abs() < FRANK_INDEPENDENCE_EPS {
        return 1.0 - lambda / 4.0;
    }
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    Quadrature::standard().integrate(0.0, lambda, integrand) / lambda
}

/// Kendall correlation of the Frank copula, `1 - (4/λ)(1 - D₁(λ))`.
pub fn frank_kendall(lambda: f64) -> f64 {
    if lambda.abs() < FRANK_INDEPENDENCE_EPS {
        return 0.0;
    }
    1.0 - 4.0 / lambda * (1.0 - debye1(lambda))
}

/// Lattice estimate of `ν` and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu: f64,
    pub grid: usize,
    pub associated_rho: f64,
    pub at_z: f64,
    pub at_x: f64,
}

/// Largest shortfall of the model's conditional CDF below that of its
/// associated Gaussian copula over a `grid × grid` midpoint lattice of
/// `(z, x) ∈ (0,1)²`, clamped below at zero.
///
/// A finite lattice only sees part of the supremum, so this is a lower
/// estimate of `ν`.
pub fn estimate_nu(family: &CopulaFamily, grid: usize) -> Result<NuEstimate> {
    if grid < 100 {
        return Err(Error::Domain(format!(
            "nu lattice needs grid >= 100, got {grid}"
        )));
    }
    let points: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    Ok(nu_on_lattice(family, grid, &points, &points))
}

/// [`estimate_nu`] with `grid` extra `z` points log-spaced from `z_floor` up
/// to the first midpoint, and their mirror images near one. The conditional
/// CDF gap is typically largest in these corners, which a uniform lattice
/// only reaches at `1 / (2 grid)`.
pub fn estimate_nu_with_floor(family: &CopulaFamily, grid: usize, z_floor: f64) -> Result<NuEstimate> {
    if grid < 100 {
        return Err(Error::Domain(format!(
            "nu lattice needs grid >= 100, got {grid}"
        )));
    }
    let first = 0.5 / grid as f64;
    if !(z_floor > 0.0 && z_floor < first) {
        return Err(Error::Domain(format!(
            "z_floor must lie in (0, {first}), got {z_floor}"
        )));
    }
    let xs: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    let (lo, hi) = (z_floor.ln(), first.ln());
    let tail: Vec<f64> = (0..grid)
        .map(|i| (lo + (hi - lo) * i as f64 / grid as f64).exp())
        .collect();
    let mut zs = tail.clone();
    zs.extend_from_slice(&xs);
    zs.extend(tail.iter().rev().map(|z| 1.0 - z));
    Ok(nu_on_lattice(family, grid, &zs, &xs))
}

fn nu_on_lattice(family: &CopulaFamily, grid: usize, zs: &[f64], xs: &[f64]) -> NuEstimate {
    let rho = family.associated_rho();
    let mut best = NuEstimate {
        nu: 0.0,
        grid,
        associated_rho: rho,
        at_z: f64::NAN,
        at_x: f64::NAN,
    };
    for &z in zs {
        for &x in xs {
            let gap = gaussian_conditional_cdf(x, z, rho) - family.conditional_cdf(x, z);
            if gap > best.nu {
                best.nu = gap;
                best.at_z = z;
                best.at_x = x;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(CopulaFamily::gaussian(1.1).is_err());
        assert!(CopulaFamily::gaussian(-1.0).is_ok());
        assert!(CopulaFamily::frank(0.0).is_err());
        assert!(CopulaFamily::frank(f64::INFINITY).is_err());
    }

    #[test]
    fn comonotone_gaussian() {
        for (u, v) in sample_gaussian_copula(1.0, 1000, 3).unwrap() {
            assert_eq!(u, v);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = sample_frank_copula(5.0, 50, 9).unwrap();
        let b = sample_frank_copula(5.0, 50, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_frank_copula(5.0, 50, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_conditional_values() {
        assert!((gaussian_conditional_cdf(0.3, 0.7, 0.0) - 0.3).abs() < 1e-12);
        assert!((gaussian_conditional_cdf(0.5, 0.5, 0.8) - 0.5).abs() < 1e-12);
        assert_eq!(gaussian_conditional_cdf(0.4, 0.3, 1.0), 1.0);
        assert_eq!(gaussian_conditional_cdf(0.2, 0.3, 1.0), 0.0);
        let mut prev = 0.0;
        for i in 1..100 {
            let c = gaussian_conditional_cdf(i as f64 / 100.0, 0.2, 0.6);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn gaussian_conditional_integrates_to_marginal() {
        let q = Quadrature::standard();
        for &x in &[0.05, 0.3, 0.7] {
            for &rho in &[0.2, 0.8] {
                // split at the conditional median where the integrand is steepest
                let total = q.integrate(0.0, x, |z| gaussian_conditional_cdf(x, z, rho))
                    + q.integrate(x, 1.0, |z| gaussian_conditional_cdf(x, z, rho));
                assert!((total - x).abs() < 1e-6, "x={x} rho={rho} got {total}");
            }
        }
    }

    #[test]
    fn frank_conditional_matches_finite_difference() {
        let (v, u, l) = (0.2, 0.4, 5.0);
        let h = 1e-6;
        let fd = (frank_copula_cdf(u + h, v, l) - frank_copula_cdf(u - h, v, l)) / (2.0 * h);
        assert!((frank_conditional_cdf(v, u, l) - fd).abs() < 1e-8);
    }

    #[test]
    fn frank_conditional_is_a_cdf() {
        for &l in &[-7.0, -1.0, 0.5, 5.0, 30.0] {
            for &u in &[0.01, 0.3, 0.9] {
                assert!(frank_conditional_cdf(0.0, u, l).abs() < 1e-12);
                assert!((frank_conditional_cdf(1.0, u, l) - 1.0).abs() < 1e-12);
                let mut prev = 0.0;
                for i in 1..=50 {
                    let c = frank_conditional_cdf(i as f64 / 50.0, u, l);
                    assert!(c >= prev - 1e-15);
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn frank_independence_and_symmetry() {
        assert_eq!(frank_conditional_cdf(0.37, 0.8, 1e-9), 0.37);
        for &l in &[-4.0, 2.0, 5.0, 10.0] {
            for &(v, u) in &[(0.2, 0.4), (0.9, 0.1), (0.5, 0.5)] {
                let lhs = frank_conditional_cdf(v, u, l);
                let rhs = 1.0 - frank_conditional_cdf(1.0 - v, 1.0 - u, l);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frank_kendall_sign_and_limits() {
        assert_eq!(frank_kendall(0.0), 0.0);
        assert!(frank_kendall(1e-6).abs() < 1e-6);
        for &l in &[-20.0, -5.0, -0.1, 0.1, 5.0, 20.0] {
            let k = frank_kendall(l);
            assert_eq!(k.signum(), l.signum());
            assert!(k.abs() < 1.0);
        }
        // odd function
        assert!((frank_kendall(3.0) + frank_kendall(-3.0)).abs() < 1e-12);
    }

    #[test]
    fn kendall_rho_roundtrip() {
        for i in 1..=9 {
            let rho = i as f64 / 10.0;
            let pair = KendallRhoPair::from_rho(rho);
            assert!((pair.rho - rho).abs() < 1e-12);
        }
        let pair = KendallRhoPair::from_rho(0.9792);
        // kappa = 1 - (2/pi) acos(rho)
        assert!((pair.kappa - 0.8699).abs() < 1e-4);
    }

    #[test]
    fn nu_zero_for_gaussian() {
        let est = estimate_nu(&CopulaFamily::gaussian(0.7).unwrap(), 200).unwrap();
        assert!(est.nu.abs() < 1e-10);
        assert!(estimate_nu(&CopulaFamily::gaussian(0.7).unwrap(), 99).is_err());
    }
}
