//! Lower bound on the Gaussian-copula ordinal-optimisation success
//! probability, optimised over the free constant `ω`, and two independent
//! oracles for the success probability itself: quadrature of the
//! first-order-statistic integral and direct Monte-Carlo simulation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{gaussian_conditional_cdf, open_unit, CopulaFamily};
use crate::error::{Error, Result};
use crate::num::{
    maximize_scan_refine, quantile_capped, std_normal_cdf, z_from_beta_uniform, Quadrature,
};
use crate::rng::stream;

/// `ln ln 2`.
pub(crate) const LN_LN_2: f64 = -0.366_512_920_581_664_3;

/// Smallest `n·c₁(ω)` accepted into the admissible set `Ωₙ`.
pub const ADMISSIBLE_N_C1: f64 = 2.0;

/// Points in the coarse `ω` scan before golden-section refinement.
pub const OMEGA_SCAN_POINTS: usize = 64;

const OMEGA_TOL: f64 = 1e-10;

/// `c₁ = 1/2 - ω/π` and `c₂ = cot(ω) / (π - 2ω)` for `ω ∈ (0, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaConstants {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
}

impl OmegaConstants {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < PI / 2.0) {
            return Err(Error::Domain(format!(
                "omega must lie in (0, pi/2), got {omega}"
            )));
        }
        Ok(Self {
            omega,
            c1: 0.5 - omega / PI,
            c2: 1.0 / omega.tan() / (PI - 2.0 * omega),
        })
    }
}

/// `(μₙ, σₙ²)` for a given `ω`. Requires `n·c₁ > 1`.
pub fn mu_sigma(n: u64, omega: &OmegaConstants) -> Result<(f64, f64)> {
    let n_c1 = n as f64 * omega.c1;
    if n_c1 <= 1.0 || n_c1.is_nan() {
        return Err(Error::Inadmissible {
            n,
            omega: omega.omega,
            n_c1,
        });
    }
    let log_nc1 = n_c1.ln();
    let mu = -(log_nc1 / omega.c2).sqrt();
    let sigma2 = -LN_LN_2 / (2.0 * omega.c2 * (log_nc1 - LN_LN_2));
    Ok((mu, sigma2))
}

/// Largest admissible `ω` at sample size `n`, or `None` when `Ωₙ` is empty.
pub fn omega_upper(n: u64) -> Option<f64> {
    let c1_min = ADMISSIBLE_N_C1 / n as f64;
    (c1_min < 0.5).then_some(PI * (0.5 - c1_min))
}

/// Coarse scan grid over `Ωₙ`, ascending in `ω`: `c₁` is log-spaced from
/// just below `1/2` down to its admissible minimum.
pub fn omega_scan_grid(n: u64) -> Option<Vec<f64>> {
    omega_upper(n)?;
    let c1_min = ADMISSIBLE_N_C1 / n as f64;
    let c1_max = 0.5 * (1.0 - 1e-6);
    if c1_min >= c1_max {
        return None;
    }
    let (lmin, lmax) = (c1_min.ln(), c1_max.ln());
    let k = OMEGA_SCAN_POINTS - 1;
    Some(
        (0..=k)
            .map(|i| {
                let c1 = (lmax + (lmin - lmax) * i as f64 / k as f64).exp();
                PI * (0.5 - c1)
            })
            .collect(),
    )
}

/// The `ω`-specific bound `Φ((Φ⁻¹(α) - ρμₙ) / √(1 - ρ² + ρ²σₙ²))`.
///
/// Does not depend on `m`. `α ≥ 1` uses the capped quantile.
pub fn p_hat_success_omega(n: u64, alpha: f64, rho: f64, omega: &OmegaConstants) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let (mu, sigma2) = mu_sigma(n, omega)?;
    Ok(bound_from_moments(alpha, rho, mu, sigma2))
}

fn bound_from_moments(alpha: f64, rho: f64, mu: f64, sigma2: f64) -> f64 {
    let q = quantile_capped(alpha);
    let scale = (1.0 - rho * rho + rho * rho * sigma2).sqrt();
    std_normal_cdf((q - rho * mu) / scale)
}

/// Outcome of the `ω`-optimised bound. `omega` is `None` when `Ωₙ` is empty
/// and nothing can be certified at this `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub p: f64,
    pub omega: Option<f64>,
}

impl CertifiedBound {
    pub fn empty() -> Self {
        Self {
            p: 0.0,
            omega: None,
        }
    }

    pub fn admissible(&self) -> bool {
        self.omega.is_some()
    }
}

/// `sup_{ω ∈ Ωₙ} p̂_ω(n, α, ρ)` via a coarse scan and golden refinement.
pub fn p_hat_success(n: u64, alpha: f64, rho: f64) -> CertifiedBound {
    if !(alpha > 0.0) {
        return CertifiedBound::empty();
    }
    let Some(grid) = omega_scan_grid(n) else {
        return CertifiedBound::empty();
    };
    let q = quantile_capped(alpha);
    let log_n = (n as f64).ln();
    let objective = |omega: f64| {
        let c1 = 0.5 - omega / PI;
        let c2 = 1.0 / omega.tan() / (PI - 2.0 * omega);
        let log_nc1 = log_n + c1.ln();
        if log_nc1 <= 0.0 || !c2.is_finite() {
            return f64::NAN;
        }
        let mu = -(log_nc1 / c2).sqrt();
        let sigma2 = -LN_LN_2 / (2.0 * c2 * (log_nc1 - LN_LN_2));
        std_normal_cdf((q - rho * mu) / (1.0 - rho * rho + rho * rho * sigma2).sqrt())
    };
    match maximize_scan_refine(objective, &grid, OMEGA_TOL) {
        Some(best) => CertifiedBound {
            p: best.value,
            omega: Some(best.argmin),
        },
        None => CertifiedBound::empty(),
    }
}

/// Bundle of everything that parameterises a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub m: u64,
    pub alpha: f64,
    pub rho: f64,
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 || self.m > self.n {
            return Err(Error::Domain(format!(
                "need 1 <= m <= n, got n = {}, m = {}",
                self.n, self.m
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Domain(format!(
                "rho must lie in (0, 1], got {}",
                self.rho
            )));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn p_hat_success(&self) -> Result<CertifiedBound> {
        self.validate()?;
        Ok(p_hat_success(self.n, self.alpha, self.rho))
    }
}

/// Quadrature of `∫₀¹ Pr(X̃ ≤ α | Z̃ = z) f_{U₁:ₙ}(z) dz` under the Gaussian
/// copula (`m = 1`). Panels are bisected until halving changes the panel
/// value by less than `1e-12`.
pub fn p_success_gaussian_oracle(n: u64, alpha: f64, rho: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    if rho >= 1.0 {
        // selection is exact: success iff min Z falls below alpha
        return -((n as f64) * (-alpha).ln_1p()).exp_m1();
    }
    let q = Quadrature::standard();
    let inv_n = 1.0 / n as f64;
    let g = |t: f64| gaussian_conditional_cdf(alpha, z_from_beta_uniform(t, inv_n), rho);
    adaptive(q, &g, 0.0, 1.0, q.integrate(0.0, 1.0, g), 0)
}

fn adaptive<G: Fn(f64) -> f64>(
    q: &Quadrature,
    g: &G,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = q.integrate(a, mid, g);
    let right = q.integrate(mid, b, g);
    if (left + right - whole).abs() < 1e-12 || depth >= 24 {
        return left + right;
    }
    adaptive(q, g, a, mid, left, depth + 1) + adaptive(q, g, mid, b, right, depth + 1)
}

/// How the Monte-Carlo oracle simulates one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMethod {
    /// Draw all `n` pairs and select the `m` smallest `Z`.
    Direct,
    /// `m = 1` only: draw the minimum `Z` from Beta(1, n) and then `X`
    /// from its conditional law, which has the same joint distribution.
    FirstOrderStatistic,
}

impl McMethod {
    pub fn auto(n: u64, m: u64) -> Self {
        if m == 1 && n > 64 {
            Self::FirstOrderStatistic
        } else {
            Self::Direct
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub successes: u64,
    pub trials: u64,
}

const MC_CHUNK: u64 = 4096;

/// Monte-Carlo estimate of the success probability: the fraction of trials
/// in which the smallest `X` among the `m` pairs with the smallest `Z` is at
/// or below the `α`-quantile of `X` (which is `α` on the uniform scale).
///
/// Trials are split into fixed chunks, each with its own stream, so the
/// result does not depend on the thread count.
pub fn p_success_mc_oracle(
    family: &CopulaFamily,
    n: u64,
    m: u64,
    alpha: f64,
    trials: u64,
    seed: u64,
    method: McMethod,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Domain(
            "Monte-Carlo oracle needs at least one trial".into(),
        ));
    }
    if m < 1 || m > n {
        return Err(Error::Domain(format!(
            "need 1 <= m <= n, got n = {n}, m = {m}"
        )));
    }
    if method == McMethod::FirstOrderStatistic && m != 1 {
        return Err(Error::Domain(
            "first-order-statistic sampling needs m = 1".into(),
        ));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut rng = stream(seed, c);
            let mut scratch = Vec::with_capacity(n as usize);
            (0..count)
                .filter(|_| match method {
                    McMethod::Direct => direct_trial(family, n, m, alpha, &mut rng, &mut scratch),
                    McMethod::FirstOrderStatistic => {
                        let z = z_from_beta_uniform(open_unit(&mut rng), 1.0 / n as f64);
                        family.sample_conditional(z, &mut rng) <= alpha
                    }
                })
                .count() as u64
        })
        .sum();
    let p = successes as f64 / trials as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        successes,
        trials,
    })
}

fn direct_trial<R: rand::Rng>(
    family: &CopulaFamily,
    n: u64,
    m: u64,
    alpha: f64,
    rng: &mut R,
    scratch: &mut Vec<(f64, f64)>,
) -> bool {
    scratch.clear();
    scratch.extend((0..n).map(|_| family.sample_pair(rng)));
    let m = m as usize;
    if m < scratch.len() {
        scratch.select_nth_unstable_by(m - 1, |a, b| a.0.total_cmp(&b.0));
    }
    scratch[..m].iter().any(|&(_, x)| x <= alpha)
}
