//! Point estimators for `α` and for the associated Gaussian correlation `ρ`,
//! plus the concentration-based confidence widths that turn them into
//! one-sided lower confidence bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growing sample of `(z, x)` pairs with an incrementally maintained Kendall
/// concordance sum and a count of `x` values at or below a fixed threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    pairs: Vec<(f64, f64)>,
    x_star: f64,
    /// `S = Σ_{i≠j} sign((x_i - x_j)(z_i - z_j))`, both orderings counted.
    concordance_sum: i64,
    below_threshold: usize,
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

impl BivariateSample {
    pub fn new(x_star: f64) -> Self {
        Self {
            pairs: Vec::new(),
            x_star,
            concordance_sum: 0,
            below_threshold: 0,
        }
    }

    pub fn with_capacity(x_star: f64, capacity: usize) -> Self {
        Self {
            pairs: Vec::with_capacity(capacity),
            ..Self::new(x_star)
        }
    }

    pub fn from_pairs(x_star: f64, pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut sample = Self::new(x_star);
        for (z, x) in pairs {
            sample.push(z, x);
        }
        sample
    }

    /// Append a pair in O(n). Exact ties contribute sign 0.
    pub fn push(&mut self, z: f64, x: f64) {
        let delta: i64 = self
            .pairs
            .iter()
            .map(|&(zi, xi)| sign(x - xi) * sign(z - zi))
            .sum();
        self.concordance_sum += 2 * delta;
        if x <= self.x_star {
            self.below_threshold += 1;
        }
        self.pairs.push((z, x));
    }

    /// Change the threshold; recounts in O(n).
    pub fn set_threshold(&mut self, x_star: f64) {
        self.x_star = x_star;
        self.below_threshold = self.pairs.iter().filter(|p| p.1 <= x_star).count();
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn threshold(&self) -> f64 {
        self.x_star
    }

    pub fn concordance_sum(&self) -> i64 {
        self.concordance_sum
    }

    pub fn below_threshold_count(&self) -> usize {
        self.below_threshold
    }

    /// `α̂ₙ`: fraction of `x` values at or below the threshold. Zero when empty.
    pub fn alpha_hat(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.below_threshold as f64 / self.pairs.len() as f64
    }

    /// Sample Kendall correlation `κ̂ₙ = S / (n(n-1))`; zero for `n < 2`.
    pub fn kappa_hat(&self) -> f64 {
        let n = self.pairs.len();
        if n < 2 {
            return 0.0;
        }
        self.concordance_sum as f64 / (n as f64 * (n as f64 - 1.0))
    }

    /// `ρ̂ₙ = sin((π/2) max{0, κ̂ₙ})`. Never exceeds one since `κ̂ₙ ≤ 1`.
    pub fn rho_hat(&self) -> f64 {
        (PI / 2.0 * self.kappa_hat().max(0.0)).sin()
    }

    /// `(α̂ₙ - b₁, ρ̂ₙ - b₂)`. Either bound may be negative early on.
    pub fn lower_confidence_bounds(&self, beta1: f64, beta2: f64) -> Result<LowerBounds> {
        let widths = ConfidenceWidths::new(self.pairs.len() as u64, beta1, beta2)?;
        let alpha_hat = self.alpha_hat();
        let rho_hat = self.rho_hat();
        Ok(LowerBounds {
            alpha_hat,
            rho_hat,
            alpha_lcb: alpha_hat - widths.b1,
            rho_lcb: rho_hat - widths.b2,
            widths,
        })
    }
}

/// Widths `b₁ = √(ln(1/β₁) / 2n)` and `b₂ = π √(ln(1/β₂) / (2⌊n/2⌋))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceWidths {
    pub b1: f64,
    pub b2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl ConfidenceWidths {
    pub fn new(n: u64, beta1: f64, beta2: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "confidence widths need n >= 2, got {n}"
            )));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {b}")));
            }
        }
        Ok(Self {
            b1: alpha_width(n, beta1),
            b2: rho_width(n, beta2),
            beta1,
            beta2,
        })
    }
}

pub fn alpha_width(n: u64, beta1: f64) -> f64 {
    ((1.0 / beta1).ln() / (2.0 * n as f64)).sqrt()
}

pub fn rho_width(n: u64, beta2: f64) -> f64 {
    PI * ((1.0 / beta2).ln() / (2.0 * (n / 2) as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub alpha_hat: f64,
    pub rho_hat: f64,
    pub alpha_lcb: f64,
    pub rho_lcb: f64,
    pub widths: ConfidenceWidths,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_s(pairs: &[(f64, f64)]) -> i64 {
        let mut s = 0;
        for (i, a) in pairs.iter().enumerate() {
            for (j, b) in pairs.iter().enumerate() {
                if i != j {
                    s += sign((a.1 - b.1) * (a.0 - b.0));
                }
            }
        }
        s
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        let s = BivariateSample::from_pairs(0.0, [(1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(s.concordance_sum(), 2);
        assert_eq!(s.kappa_hat(), 1.0);
        assert_eq!(s.rho_hat(), 1.0);
        let s = BivariateSample::from_pairs(0.0, [(1.0, 2.0), (2.0, 1.0)]);
        assert_eq!(s.concordance_sum(), -2);
        assert_eq!(s.kappa_hat(), -1.0);
        assert_eq!(s.rho_hat(), 0.0);
    }

    #[test]
    fn negative_kappa_clamps_rho() {
        // 3 discordant and 3 tied unordered pairs: kappa = -6 / 12
        let s = BivariateSample::from_pairs(0.0, [(1.0, 4.0), (2.0, 3.0), (3.0, 3.0), (4.0, 3.0)]);
        assert!((s.kappa_hat() + 0.5).abs() < 1e-15);
        assert_eq!(s.rho_hat(), 0.0);
    }

    #[test]
    fn ties_count_zero() {
        let s = BivariateSample::from_pairs(0.0, [(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)]);
        assert_eq!(s.concordance_sum(), brute_force_s(s.pairs()));
        assert_eq!(s.concordance_sum(), 2);
    }

    #[test]
    fn alpha_hat_counts() {
        let s = BivariateSample::from_pairs(2.5, (1..=4).map(|i| (0.0, i as f64)));
        assert_eq!(s.alpha_hat(), 0.5);
        let s = BivariateSample::from_pairs(10.0, (1..=4).map(|i| (0.0, i as f64)));
        assert_eq!(s.alpha_hat(), 1.0);
        let mut s = s;
        s.set_threshold(1.0);
        assert_eq!(s.below_threshold_count(), 1);
    }

    #[test]
    fn incremental_matches_brute_force_on_prefixes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut s = BivariateSample::new(0.5);
        for _ in 0..200 {
            let z: f64 = rng.random();
            let x: f64 = 0.5 * z + 0.5 * rng.random::<f64>();
            s.push(z, x);
            assert_eq!(s.concordance_sum(), brute_force_s(s.pairs()));
        }
    }

    #[test]
    fn widths_at_reported_run_size() {
        let w = ConfidenceWidths::new(2658, 0.0125, 0.0125).unwrap();
        assert!((w.b1 - (80f64.ln() / 5316.0).sqrt()).abs() < 1e-15);
        assert!((w.b1 - 0.028_710_78).abs() < 1e-8);
        assert!((w.b2 - PI * (80f64.ln() / 2658.0).sqrt()).abs() < 1e-15);
        assert!((w.b2 - 0.127_558_64).abs() < 1e-8);
        let w = ConfidenceWidths::new(10, 1.0, 1.0).unwrap();
        assert_eq!((w.b1, w.b2), (0.0, 0.0));
        // odd n uses floor(n / 2)
        assert_eq!(rho_width(2659, 0.1), rho_width(2658, 0.1));
    }

    #[test]
    fn widths_validate() {
        assert!(ConfidenceWidths::new(1, 0.1, 0.1).is_err());
        assert!(ConfidenceWidths::new(10, 0.0, 0.1).is_err());
        assert!(ConfidenceWidths::new(10, 0.1, 1.5).is_err());
    }

    #[test]
    fn lcb_zero_width_limit() {
        let s = BivariateSample::from_pairs(0.5, [(0.1, 0.2), (0.3, 0.7), (0.5, 0.4)]);
        let lb = s.lower_confidence_bounds(1.0, 1.0).unwrap();
        assert_eq!(lb.alpha_lcb, s.alpha_hat());
        assert_eq!(lb.rho_lcb, s.rho_hat());
    }
}
