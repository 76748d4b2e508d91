//! Desk-scale controller-tuning benchmark: randomly perturbed discrete-time
//! linear plants, quadratic-cost controllers with randomised weights, and
//! closed-loop tracking costs on the nominal and a perturbed plant. The
//! resulting `(J̄(θ), J(ψ, θ))` stream is a [`SampleSource`] for the engine.
//!
//! [`SampleSource`]: ordtune_core::SampleSource

pub mod config;
pub mod controller;
pub mod error;
pub mod scenario;
pub mod simulate;
pub mod source;

pub use config::ScenarioConfig;
pub use controller::{finite_horizon_gain, sample_controller, ControllerSample};
pub use error::{BenchError, Result};
pub use scenario::PlantScenario;
pub use simulate::{evaluate_pair, tracking_cost, PairEvaluation, Rollout};
pub use source::{pilot_threshold, PlantCandidate, PlantSource};
