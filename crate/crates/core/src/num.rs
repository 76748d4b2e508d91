//! Scalar numerics shared by every other module: the standard normal CDF and
//! quantile, the density of the first order statistic of a uniform sample,
//! Gauss-Legendre quadrature on `[0, 1]` and a derivative-free 1-D minimizer.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Quantile returned for probabilities at or above one. Beyond this point the
/// CDF is indistinguishable from 1 in double precision.
pub const QUANTILE_CAP: f64 = 8.2;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal cumulative distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `ln Φ(x)`, finite for arbitrarily negative `x`.
///
/// Below `x = -5` the Mills ratio is evaluated by its continued fraction so
/// the result stays finite where `Φ(x)` itself underflows.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -5.0 {
        return std_normal_cdf(x).ln();
    }
    let t = -x;
    -0.5 * t * t - LN_SQRT_2PI + mills_ratio(t).ln()
}

// R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), modified Lentz.
fn mills_ratio(t: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// The initial value comes from the inverse complementary error function and
/// is polished by one Newton step against [`std_normal_cdf`], so that the pair
/// is self-consistent.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    Ok(quantile_unchecked(p))
}

/// Quantile that saturates instead of failing: `p ≥ 1` maps to
/// [`QUANTILE_CAP`] and `p ≤ 0` to `-inf`.
pub(crate) fn quantile_capped(p: f64) -> f64 {
    if p >= 1.0 {
        QUANTILE_CAP
    } else if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        quantile_unchecked(p).min(QUANTILE_CAP)
    }
}

fn quantile_unchecked(p: f64) -> f64 {
    // Work on the smaller tail so the Newton residual keeps relative accuracy.
    let (q, flip) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let mut x = -SQRT_2 * erfc_inv(2.0 * q);
    let dens = std_normal_pdf(x);
    if dens > 0.0 && x.is_finite() {
        let step = (std_normal_cdf(x) - q) / dens;
        if step.is_finite() {
            x -= step;
        }
    }
    if flip {
        -x
    } else {
        x
    }
}

/// Density of the minimum of `n` i.i.d. uniforms, i.e. Beta(1, n):
/// `n (1 - z)^(n-1)`.
pub fn beta_first_order_density(z: f64, n: u64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Domain(format!(
            "Beta(1, n) density needs z in (0, 1), got {z}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("Beta(1, n) density needs n >= 1".into()));
    }
    let n_f = n as f64;
    Ok(n_f * ((n_f - 1.0) * (-z).ln_1p()).exp())
}

/// Fixed-order Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub const DEFAULT_NODES: usize = 256;

    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        let (nodes, weights) = gauss_legendre_unit(node_count);
        Ok(Self { nodes, weights })
    }

    /// Shared 256-node rule.
    pub fn standard() -> &'static Quadrature {
        static RULE: OnceLock<Quadrature> = OnceLock::new();
        RULE.get_or_init(|| Quadrature::new(Self::DEFAULT_NODES).expect("nonzero node count"))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + h * t))
            .sum::<f64>()
            * h
    }

    /// `∫₀¹ g(z) n(1-z)^(n-1) dz` via `t = 1 - (1-z)^n`, which turns the
    /// Beta(1, n) weight into the uniform one on `t ∈ [a, b] ⊂ [0, 1]`.
    pub fn integrate_beta_first_order_on<G: Fn(f64) -> f64>(
        &self,
        n: u64,
        a: f64,
        b: f64,
        g: G,
    ) -> f64 {
        let inv_n = 1.0 / n as f64;
        self.integrate(a, b, |t| g(z_from_beta_uniform(t, inv_n)))
    }

    pub fn integrate_beta_first_order<G: Fn(f64) -> f64>(&self, n: u64, g: G) -> f64 {
        self.integrate_beta_first_order_on(n, 0.0, 1.0, g)
    }
}

/// Inverse of `t = 1 - (1-z)^n`.
pub(crate) fn z_from_beta_uniform(t: f64, inv_n: f64) -> f64 {
    -((-t).ln_1p() * inv_n).exp_m1()
}

fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let n_f = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n_f + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k_f = k as f64;
        let p2 = ((2.0 * k_f - 1.0) * x * p1 - (k_f - 1.0) * p0) / k_f;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a bracketed 1-D minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimizer of `f` on `[lo, hi]`.
///
/// For quasiconvex `f` the result is the global minimizer to within `tol`.
/// On a flat final bracket the midpoint is returned.
pub fn minimize_quasiconvex<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()).max(1e-300));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if lt(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else if lt(fd, fc) {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        } else {
            // Equal values: the minimizer set of a quasiconvex function
            // contains [c, d], so shrink from both sides.
            a = c;
            b = d;
            c = b - INV_PHI * (b - a);
            d = a + INV_PHI * (b - a);
            fc = f(c);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = Minimum {
        argmin: mid,
        value: f(mid),
    };
    for edge in [lo.min(hi), lo.max(hi)] {
        let v = f(edge);
        if lt(v, best.value) {
            best = Minimum {
                argmin: edge,
                value: v,
            };
        }
    }
    best
}

// NaN compares as +inf so that undefined regions are never selected.
fn lt(a: f64, b: f64) -> bool {
    let a = if a.is_nan() { f64::INFINITY } else { a };
    let b = if b.is_nan() { f64::INFINITY } else { b };
    a < b
}

/// Maximize `f` over `[lo, hi]`: coarse scan on `grid` (sorted ascending,
/// inside `[lo, hi]`), then golden-section refinement between the neighbours
/// of the best scan point.
pub(crate) fn maximize_scan_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    grid: &[f64],
    tol: f64,
) -> Option<Minimum> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    let (i, v) = best?;
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(grid.len() - 1)];
    let refined = minimize_quasiconvex(|x| -f(x), a, b, tol);
    if -refined.value >= v {
        Some(Minimum {
            argmin: refined.argmin,
            value: -refined.value,
        })
    } else {
        Some(Minimum {
            argmin: grid[i],
            value: v,
        })
    }
}
