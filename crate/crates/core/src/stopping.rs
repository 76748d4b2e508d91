//! Distribution bounds on the stopping time of the sequential certification
//! loop, the variant optimised along the Pareto front `p̂_ω = 1 - δ`, and the
//! scenario-approach sample count used as a comparator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{alpha_width, rho_width};
use crate::num::{
    maximize_scan_refine, quantile_capped, std_normal_cdf,
    std_normal_quantile,
};
use crate::success::{mu_sigma, omega_scan_grid, p_hat_success, OmegaConstants, LN_LN_2};

const ALPHA_TOL: f64 = 1e-12;
const INNER_SCAN_POINTS: usize = 32;
const OMEGA_TOL: f64 = 1e-9;
/// Slack when checking that a front point certifies `1 - δ`.
const FRONT_SLACK: f64 = 1e-9;

/// Coefficients of the quadratic form `d₁ρ² + d₂qₐρ + d₃qₐ² + d₄ = 0`, with
/// `qₐ = Φ⁻¹(α)`, whose zero set is the curve `p̂_ω(n, α, ρ) = 1 - δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoCoefficients {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub omega: f64,
    pub n: u64,
    pub delta: f64,
}

impl ParetoCoefficients {
    pub fn new(omega: f64, n: u64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        let w = OmegaConstants::new(omega)?;
        mu_sigma(n, &w)?;
        let c2 = w.c2;
        let k = LN_LN_2;
        let l = (n as f64 * w.c1).ln();
        let q = std_normal_quantile(1.0 - delta)?;
        let q2 = q * q;
        let d1 = -2.0 * l * l / k + 2.0 * l - 2.0 * c2 * q2 * l / k + 2.0 * c2 * q2 - q2;
        let d2 = -4.0 * c2.sqrt() * l.powf(1.5) / k + 4.0 * c2.sqrt() * l.sqrt();
        let d3 = -2.0 * c2 * l / k + 2.0 * c2;
        let d4 = 2.0 * c2 * q2 * l / k - 2.0 * c2 * q2;
        // ln ln 2 < 0 < ln(n c1) makes the leading coefficient in qₐ positive
        debug_assert!(d3 > 0.0);
        Ok(Self {
            d1,
            d2,
            d3,
            d4,
            omega,
            n,
            delta,
        })
    }

    /// `d₁ρ² + d₂qₐρ + d₃qₐ² + d₄` at `(α, ρ)`.
    pub fn residual(&self, alpha: f64, rho: f64) -> f64 {
        let qa = quantile_capped(alpha);
        self.d1 * rho * rho + self.d2 * qa * rho + self.d3 * qa * qa + self.d4
    }

    /// `ρ_ω(α)`: the positive root in `ρ`, or `None` when the discriminant is
    /// negative or the root is not positive.
    pub fn rho_on_front(&self, alpha: f64) -> Option<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return None;
        }
        let qa = quantile_capped(alpha);
        let b = self.d2 * qa;
        let disc = b * b - 4.0 * self.d1 * (self.d3 * qa * qa + self.d4);
        if disc < 0.0 {
            return None;
        }
        let rho = (-b + disc.sqrt()) / (2.0 * self.d1);
        (rho > 0.0 && rho.is_finite()).then_some(rho)
    }

    /// `α_ω(ρ) = Φ(larger root in qₐ)`, or `None` for a negative discriminant.
    pub fn alpha_on_front(&self, rho: f64) -> Option<f64> {
        let b = self.d2 * rho;
        let disc = b * b - 4.0 * self.d3 * (self.d1 * rho * rho + self.d4);
        if disc < 0.0 {
            return None;
        }
        let qa = (-b + disc.sqrt()) / (2.0 * self.d3);
        qa.is_finite().then(|| std_normal_cdf(qa))
    }
}

/// True parameters and risk levels for a stopping-time query at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingBoundQuery {
    pub n: u64,
    pub alpha0: f64,
    pub rho0: f64,
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl StoppingBoundQuery {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!(
                "stopping bounds need n >= 2, got {}",
                self.n
            )));
        }
        for (name, v) in [
            ("alpha0", self.alpha0),
            ("rho0", self.rho0),
            ("delta", self.delta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if self.delta >= 1.0 {
            return Err(Error::Domain("delta must be below 1".into()));
        }
        Ok(())
    }

    pub fn with_n(&self, n: u64) -> Self {
        Self { n, ..*self }
    }

    pub fn b1(&self) -> f64 {
        alpha_width(self.n, self.beta1)
    }

    pub fn b2(&self) -> f64 {
        rho_width(self.n, self.beta2)
    }

    /// `α₀ - b₁`: the largest `α*` with a positive gap.
    pub fn alpha_cap(&self) -> f64 {
        self.alpha0 - self.b1()
    }

    /// `ρ₀ - b₂`.
    pub fn rho_cap(&self) -> f64 {
        self.rho0 - self.b2()
    }

    /// `exp(-2n a²) + exp(-⌊n/2⌋ 2r²/π²)` for gaps `a`, `r`.
    pub fn tail_sum(&self, alpha_gap: f64, rho_gap: f64) -> f64 {
        let n = self.n as f64;
        let half = (self.n / 2) as f64;
        (-2.0 * n * alpha_gap * alpha_gap).exp()
            + (-half * 2.0 * rho_gap * rho_gap / (PI * PI)).exp()
    }
}

/// A lower bound on `Pr(τ ≤ n)`. `Uninformative` when the preconditions
/// fail; a `Bound` may still be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StoppingBound {
    Bound(f64),
    Uninformative,
}

impl StoppingBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Bound(v) => Some(*v),
            Self::Uninformative => None,
        }
    }

    /// Numeric value for comparisons, with `Uninformative` mapped to `-inf`.
    pub fn or_neg_inf(&self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_informative(&self) -> bool {
        matches!(self, Self::Bound(_))
    }
}

/// `1 - exp(-2n(α₀-α*-b₁)²) - exp(-⌊n/2⌋ 2(ρ₀-ρ*-b₂)²/π²)` at a supplied
/// target `(α*, ρ*)`, which must have positive gaps and certify `1 - δ`.
pub fn stopping_cdf_lower_bound(
    query: &StoppingBoundQuery,
    alpha_star: f64,
    rho_star: f64,
) -> Result<StoppingBound> {
    query.validate()?;
    let a = query.alpha_cap() - alpha_star;
    let r = query.rho_cap() - rho_star;
    if !(a > 0.0 && r > 0.0) {
        return Ok(StoppingBound::Uninformative);
    }
    if p_hat_success(query.n, alpha_star, rho_star).p < 1.0 - query.delta - FRONT_SLACK {
        return Ok(StoppingBound::Uninformative);
    }
    Ok(StoppingBound::Bound(1.0 - query.tail_sum(a, r)))
}

/// Result of the front-optimised bound, with the optimiser's location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedStoppingBound {
    pub bound: StoppingBound,
    pub omega: Option<f64>,
    pub alpha_star: Option<f64>,
    pub rho_star: Option<f64>,
}

impl OptimizedStoppingBound {
    fn uninformative() -> Self {
        Self {
            bound: StoppingBound::Uninformative,
            omega: None,
            alpha_star: None,
            rho_star: None,
        }
    }
}

/// `A'_ω = [α_ω(ρ₀ - b₂), α₀ - b₁]`, or `None` when empty.
pub fn admissible_alpha_interval(
    query: &StoppingBoundQuery,
    coeffs: &ParetoCoefficients,
) -> Option<(f64, f64)> {
    let hi = query.alpha_cap();
    let r = query.rho_cap();
    if !(hi > 0.0 && r > 0.0) {
        return None;
    }
    let lo = coeffs.alpha_on_front(r)?;
    (lo < hi).then_some((lo, hi))
}

fn inner_objective(query: &StoppingBoundQuery, coeffs: &ParetoCoefficients, alpha: f64) -> f64 {
    match coeffs.rho_on_front(alpha) {
        Some(rho) => query.tail_sum(query.alpha_cap() - alpha, query.rho_cap() - rho),
        None => f64::NAN,
    }
}

/// Minimum of the two-exponential objective over `A'_ω` at a fixed `ω`:
/// `(α*, objective)`, or `None` when `A'_ω` is empty.
pub fn inner_minimum(query: &StoppingBoundQuery, omega: f64) -> Option<(f64, f64)> {
    let coeffs = ParetoCoefficients::new(omega, query.n, query.delta).ok()?;
    let (lo, hi) = admissible_alpha_interval(query, &coeffs)?;
    // Near either end one exponential flattens towards 1, so the objective
    // is only unimodal where it lies below 1. A coarse scan locates that
    // basin before the golden-section refinement.
    let grid: Vec<f64> = (0..=INNER_SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / INNER_SCAN_POINTS as f64)
        .collect();
    let m = maximize_scan_refine(|a| -inner_objective(query, &coeffs, a), &grid, ALPHA_TOL)?;
    (-m.value).is_finite().then_some((m.argmin, -m.value))
}

/// `1 - inf_ω min_{α* ∈ A'_ω} [exp(-2n(α₀-α*-b₁)²) + exp(-⌊n/2⌋ 2(ρ₀-ρ_ω(α*)-b₂)²/π²)]`.
pub fn optimized_stopping_bound(query: &StoppingBoundQuery) -> Result<OptimizedStoppingBound> {
    query.validate()?;
    if query.alpha_cap() <= 0.0 || query.rho_cap() <= 0.0 {
        return Ok(OptimizedStoppingBound::uninformative());
    }
    let Some(grid) = omega_scan_grid(query.n) else {
        return Ok(OptimizedStoppingBound::uninformative());
    };
    let score = |omega: f64| inner_minimum(query, omega).map_or(f64::NAN, |(_, v)| -v);
    let Some(best) = maximize_scan_refine(score, &grid, OMEGA_TOL) else {
        return Ok(OptimizedStoppingBound::uninformative());
    };
    let omega = best.argmin;
    let (alpha_star, _) = inner_minimum(query, omega).expect("best omega has a feasible interval");
    let rho_star = ParetoCoefficients::new(omega, query.n, query.delta)?.rho_on_front(alpha_star);
    Ok(OptimizedStoppingBound {
        bound: StoppingBound::Bound(1.0 + best.value),
        omega: Some(omega),
        alpha_star: Some(alpha_star),
        rho_star,
    })
}

/// One point of the inner objective along the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub alpha: f64,
    pub rho: f64,
    pub objective: f64,
    pub bound: f64,
}

/// The inner objective sampled at `points` equispaced `α*` across `A'_ω`.
/// Empty when `A'_ω` is empty.
pub fn inner_objective_trace(
    query: &StoppingBoundQuery,
    omega: f64,
    points: usize,
) -> Result<Vec<FrontPoint>> {
    query.validate()?;
    let coeffs = ParetoCoefficients::new(omega, query.n, query.delta)?;
    let Some((lo, hi)) = admissible_alpha_interval(query, &coeffs) else {
        return Ok(Vec::new());
    };
    let k = points.max(2) - 1;
    Ok((0..=k)
        .filter_map(|i| {
            let alpha = lo + (hi - lo) * i as f64 / k as f64;
            let rho = coeffs.rho_on_front(alpha)?;
            let objective = query.tail_sum(query.alpha_cap() - alpha, query.rho_cap() - rho);
            Some(FrontPoint {
                alpha,
                rho,
                objective,
                bound: 1.0 - objective,
            })
        })
        .collect())
}

/// Smallest `ρ₀ ∈ [lo, hi]` at which the optimised bound at `query.n`
/// reaches `level`, by bisection (the bound is nondecreasing in `ρ₀`).
/// `None` when even `ρ₀ = hi` falls short.
pub fn rho0_crossing(
    query: &StoppingBoundQuery,
    level: f64,
    lo: f64,
    hi: f64,
) -> Result<Option<f64>> {
    let at = |rho0: f64| -> Result<f64> {
        Ok(
            optimized_stopping_bound(&StoppingBoundQuery { rho0, ..*query })?
                .bound
                .or_neg_inf(),
        )
    };
    if at(hi)? < level {
        return Ok(None);
    }
    if at(lo)? >= level {
        return Ok(Some(lo));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-7 {
        let mid = 0.5 * (a + b);
        if at(mid)? >= level {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(b))
}

/// Scenario-approach sample count
/// `⌈(2/ε) ln(1/η) + 2d + (2d/ε) ln(2/ε)⌉`.
pub fn scenario_sample_bound(epsilon: f64, eta: f64, d: u64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon and eta must lie in (0, 1), got {epsilon} and {eta}"
        )));
    }
    if d == 0 {
        return Err(Error::Domain("d must be at least 1".into()));
    }
    let d = d as f64;
    let raw = 2.0 / epsilon * (1.0 / eta).ln() + 2.0 * d + 2.0 * d / epsilon * (2.0 / epsilon).ln();
    Ok(raw.ceil() as u64)
}
