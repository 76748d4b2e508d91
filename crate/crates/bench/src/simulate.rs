use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::controller::ControllerSample;
use crate::scenario::PlantScenario;

/// Bound on `‖x‖∞`; larger states are clamped so that unstable loops still
/// give a finite cost.
pub const STATE_CLAMP: f64 = 1e8;

/// Cost of one closed-loop run and whether the state clamp was hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rollout {
    pub cost: f64,
    pub clamped: bool,
}

/// `J̄(θ)` on the nominal plant and `J(ψ, θ)` on one perturbed plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvaluation {
    pub z: f64,
    pub x: f64,
    pub nominal_clamped: bool,
    pub perturbed_clamped: bool,
}

/// `‖Y - Y_ref‖²_F` for the loop `u = -K(x - C⁺ r_t)` over the reference horizon.
pub fn tracking_cost(
    scenario: &PlantScenario,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    controller: &ControllerSample,
) -> Rollout {
    let mut x = scenario.x0.clone();
    let mut cost = 0.0;
    let mut clamped = false;
    for t in 0..scenario.horizon() {
        let r = scenario.reference.column(t);
        let target = &scenario.c_pinv * r;
        let u = -(&controller.k * (&x - target));
        x = a * &x + b * u;
        if x.amax() > STATE_CLAMP || x.iter().any(|v| v.is_nan()) {
            clamped = true;
            x.apply(|v| *v = if v.is_nan() { STATE_CLAMP } else { v.clamp(-STATE_CLAMP, STATE_CLAMP) });
        }
        let err = &scenario.output_c * &x - r;
        cost += err.norm_squared();
    }
    Rollout { cost, clamped }
}

/// `(A + ΔA, B + ΔB)` with independent zero-mean Gaussian entries.
pub fn perturbed_plant(scenario: &PlantScenario, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |std: f64| std * rng.sample::<f64, _>(StandardNormal);
    let a = scenario.nominal_a.zip_map(&scenario.std_a, |m, s| m + draw(s));
    let b = scenario.nominal_b.zip_map(&scenario.std_b, |m, s| m + draw(s));
    (a, b)
}

pub fn evaluate_pair(
    scenario: &PlantScenario,
    controller: &ControllerSample,
    perturb_seed: u64,
) -> PairEvaluation {
    let nominal = tracking_cost(scenario, &scenario.nominal_a, &scenario.nominal_b, controller);
    let (a, b) = perturbed_plant(scenario, perturb_seed);
    let perturbed = tracking_cost(scenario, &a, &b, controller);
    PairEvaluation {
        z: nominal.cost,
        x: perturbed.cost,
        nominal_clamped: nominal.clamped,
        perturbed_clamped: perturbed.clamped,
    }
}

/// Output trajectory `Y` (`o × T`) for inspection.
pub fn output_trajectory(
    scenario: &PlantScenario,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    controller: &ControllerSample,
) -> DMatrix<f64> {
    let mut x: DVector<f64> = scenario.x0.clone();
    let mut y = DMatrix::zeros(scenario.outputs(), scenario.horizon());
    for t in 0..scenario.horizon() {
        let target = &scenario.c_pinv * scenario.reference.column(t);
        let u = -(&controller.k * (&x - target));
        x = a * &x + b * u;
        x.apply(|v| *v = v.clamp(-STATE_CLAMP, STATE_CLAMP));
        y.set_column(t, &(&scenario.output_c * &x));
    }
    y
}
