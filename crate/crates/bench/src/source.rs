use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ordtune_core::rng::derive_seed;
use ordtune_core::{Draw, FreshTest, SampleSource};

use crate::controller::{sample_controller, ControllerSample};
use crate::scenario::PlantScenario;
use crate::simulate::{evaluate_pair, perturbed_plant, tracking_cost};

/// A drawn controller and its position in the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantCandidate {
    pub index: u64,
    pub controller: ControllerSample,
}

/// Stream of `(controller, J̄, J)` draws. Draw `k` uses controller seed
/// `derive_seed(seed, 2k)` and plant seed `derive_seed(seed, 2k + 1)`.
#[derive(Debug)]
pub struct PlantSource {
    scenario: Arc<PlantScenario>,
    seed: u64,
    drawn: u64,
    clamp_events: AtomicU64,
}

impl PlantSource {
    pub fn new(scenario: Arc<PlantScenario>, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            drawn: 0,
            clamp_events: AtomicU64::new(0),
        }
    }

    pub fn scenario(&self) -> &PlantScenario {
        &self.scenario
    }

    /// Rollouts that hit the state clamp so far, fresh tests included.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }
}

impl SampleSource for PlantSource {
    type Candidate = PlantCandidate;

    fn draw(&mut self) -> Draw<PlantCandidate> {
        let k = self.drawn;
        self.drawn += 1;
        let controller = sample_controller(&self.scenario, derive_seed(self.seed, 2 * k));
        let eval = evaluate_pair(&self.scenario, &controller, derive_seed(self.seed, 2 * k + 1));
        let clamps = eval.nominal_clamped as u64 + eval.perturbed_clamped as u64;
        self.clamp_events.fetch_add(clamps, Ordering::Relaxed);
        Draw {
            candidate: PlantCandidate {
                index: k + 1,
                controller,
            },
            z: eval.z,
            x: eval.x,
        }
    }
}

impl FreshTest for PlantSource {
    /// Cost of the candidate on a newly perturbed plant.
    fn fresh_cost(&self, candidate: &PlantCandidate, seed: u64) -> f64 {
        let (a, b) = perturbed_plant(&self.scenario, seed);
        let r = tracking_cost(&self.scenario, &a, &b, &candidate.controller);
        if r.clamped {
            self.clamp_events.fetch_add(1, Ordering::Relaxed);
        }
        r.cost
    }
}

/// Empirical `quantile` of `J` over `count` pilot draws, as a threshold
/// `J*` with true `α ≈ quantile`.
pub fn pilot_threshold(scenario: &Arc<PlantScenario>, seed: u64, count: usize, quantile: f64) -> f64 {
    let mut src = PlantSource::new(scenario.clone(), seed);
    let mut xs: Vec<f64> = (0..count).map(|_| src.draw().x).collect();
    xs.sort_by(f64::total_cmp);
    let idx = ((quantile * count as f64).ceil() as usize).clamp(1, count) - 1;
    xs[idx]
}
