//! Sequential certification of the ordinal-optimisation success probability,
//! and the tooling around it: copula samplers, point estimators with
//! concentration-based confidence widths, the Gaussian-copula lower bound on
//! the success probability, stopping-time bounds and the sequential
//! certification / tuning engine.

pub mod copula;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod num;
pub mod rng;
pub mod stopping;
pub mod success;

pub use copula::CopulaModel;
pub use engine::{
    run_certification, run_tuning, tune_then_test, CapExhausted, CopulaCandidate, CopulaSource,
    Draw, EngineConfig, EngineError, FreshTest, SampleSource, StepRecord, StoppingReport,
    TestOutcome, Tuned,
};
pub use error::{Error, Result};
pub use estimation::{BivariateSample, ConfidenceWidths};
pub use stopping::{ParetoCoefficients, StoppingBound, StoppingBoundQuery};
pub use success::{BoundParams, CertifiedBound, OmegaConstants};
