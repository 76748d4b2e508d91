use ordtune_core::stopping::{
    inner_minimum, inner_objective_trace, optimized_stopping_bound, rho0_crossing,
    scenario_sample_bound, stopping_cdf_lower_bound, StoppingBound,
};
use ordtune_core::success::{p_hat_success_omega, OmegaConstants};
use ordtune_core::{ParetoCoefficients, StoppingBoundQuery};

fn fig_query() -> StoppingBoundQuery {
    StoppingBoundQuery {
        n: 7500,
        alpha0: 0.1,
        rho0: 0.8,
        delta: 0.1,
        beta1: 0.05,
        beta2: 0.05,
    }
}

fn run_query() -> StoppingBoundQuery {
    StoppingBoundQuery {
        n: 2658,
        alpha0: 0.07,
        rho0: 0.9792,
        delta: 0.025,
        beta1: 0.0125,
        beta2: 0.0125,
    }
}

// bisection on p̂_ω(ρ) = 1 - δ, independent of the closed-form roots
fn rho_by_bisection(n: u64, alpha: f64, omega: f64, delta: f64) -> f64 {
    let w = OmegaConstants::new(omega).unwrap();
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p_hat_success_omega(n, alpha, mid, &w).unwrap() < 1.0 - delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn front_residual_and_inverse_consistency() {
    let c = ParetoCoefficients::new(0.84, 7500, 0.1).unwrap();
    let lo = c.alpha_on_front(1.0).unwrap();
    let hi = c.alpha_on_front(1e-6).unwrap();
    assert!(lo < hi);
    for i in 0..20 {
        let alpha = lo + (hi - lo) * (i as f64 + 0.5) / 20.0;
        let rho = c.rho_on_front(alpha).unwrap();
        assert!(rho > 0.0 && rho <= 1.0);
        assert!(c.residual(alpha, rho).abs() <= 1e-6);
        assert!((c.alpha_on_front(rho).unwrap() - alpha).abs() <= 1e-6);
        assert!((rho - rho_by_bisection(7500, alpha, 0.84, 0.1)).abs() < 1e-9);
    }
}

#[test]
fn front_reference_points() {
    let c = ParetoCoefficients::new(0.84, 7500, 0.1).unwrap();
    let rho = c.rho_on_front(0.05).unwrap();
    assert!((rho - rho_by_bisection(7500, 0.05, 0.84, 0.1)).abs() < 1e-9);
    // alpha at rho = 0.75 against bisection in alpha
    let w = OmegaConstants::new(0.84).unwrap();
    let (mut lo, mut hi) = (1e-12, 0.9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p_hat_success_omega(7500, mid, 0.75, &w).unwrap() < 0.9 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((c.alpha_on_front(0.75).unwrap() - 0.5 * (lo + hi)).abs() < 1e-9);
    // the front decreases in alpha, so rho = 1 gives its smallest alpha
    let a1 = c.alpha_on_front(1.0).unwrap();
    assert!(a1 < c.alpha_on_front(0.9).unwrap());
}

#[test]
fn two_omegas_give_distinct_self_consistent_fronts() {
    let a = ParetoCoefficients::new(0.6, 7500, 0.1).unwrap();
    let b = ParetoCoefficients::new(1.1, 7500, 0.1).unwrap();
    assert_ne!(a, b);
    for c in [a, b] {
        let rho = c.rho_on_front(0.05).unwrap();
        assert!(c.residual(0.05, rho).abs() < 1e-9);
    }
}

#[test]
fn inner_objective_is_quasiconvex_along_front() {
    let trace = inner_objective_trace(&fig_query(), 0.84, 2000).unwrap();
    assert!(trace.len() > 1000);
    // unimodal where the bound is informative; near the ends one
    // exponential flattens towards 1 and the objective exceeds 1
    let basin: Vec<_> = trace.iter().filter(|p| p.objective < 1.0).collect();
    assert!(basin.len() > 1000);
    let signs: Vec<bool> = basin
        .windows(2)
        .map(|w| w[1].objective - w[0].objective > 0.0)
        .collect();
    let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
    assert_eq!(changes, 1);
    // the bound along the front has a single interior maximum
    let best = trace
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.bound.total_cmp(&b.1.bound))
        .unwrap()
        .0;
    assert!(best > 0 && best < trace.len() - 1);
}

#[test]
fn inner_minimum_matches_dense_grid() {
    let q = fig_query();
    let (_, v) = inner_minimum(&q, 0.84).unwrap();
    let grid = inner_objective_trace(&q, 0.84, 10_000).unwrap();
    let g = grid.iter().map(|p| p.objective).fold(f64::INFINITY, f64::min);
    assert!((g - v).abs() < 1e-6 && v <= g + 1e-12);
}

#[test]
fn optimized_bound_dominates_supplied_targets() {
    let q = fig_query();
    let opt = optimized_stopping_bound(&q).unwrap().bound.value().unwrap();
    let mut checked = 0;
    for omega in [0.6, 0.84, 1.0] {
        for p in inner_objective_trace(&q, omega, 25).unwrap() {
            let v = stopping_cdf_lower_bound(&q, p.alpha, p.rho).unwrap();
            if let StoppingBound::Bound(v) = v {
                assert!(opt >= v - 1e-9);
                checked += 1;
            }
        }
    }
    assert!(checked > 20);
    // interior points above the front are feasible too
    let v = stopping_cdf_lower_bound(&q, 0.08, 0.72).unwrap();
    assert!(v.is_informative() && opt >= v.value().unwrap());
}

#[test]
fn bound_grows_with_n_along_the_run_configuration() {
    let q = run_query();
    assert_eq!(
        optimized_stopping_bound(&q.with_n(2000)).unwrap().bound,
        StoppingBound::Uninformative
    );
    let mut prev = f64::NEG_INFINITY;
    for n in (3000..=30_000).step_by(1500) {
        let v = optimized_stopping_bound(&q.with_n(n)).unwrap().bound.or_neg_inf();
        assert!(v >= prev - 1e-9, "n {n}");
        prev = v;
    }
    let b = |n| optimized_stopping_bound(&q.with_n(n)).unwrap().bound.value().unwrap();
    assert!((b(3000) + 0.672).abs() < 0.01);
    assert!((b(5000) - 0.534).abs() < 0.01);
    assert!(b(10_000) > 0.999);
}

#[test]
fn median_crossing_near_reported_threshold() {
    let q = StoppingBoundQuery {
        n: 29_156,
        ..run_query()
    };
    let at = |rho0| {
        optimized_stopping_bound(&StoppingBoundQuery { rho0, ..q })
            .unwrap()
            .bound
            .or_neg_inf()
    };
    assert!(at(0.78) < 0.5 && at(0.82) > 0.5);
    let cross = rho0_crossing(&q, 0.5, 0.5, 1.0).unwrap().unwrap();
    assert!((0.78..=0.82).contains(&cross), "{cross}");
    assert!((cross - 0.8011).abs() < 0.002);
}

#[test]
fn scenario_comparator() {
    assert_eq!(scenario_sample_bound(0.0499, 1e-4, 192).unwrap(), 29_156);
    assert_eq!(scenario_sample_bound(0.5, 0.5, 1).unwrap(), 11);
}
