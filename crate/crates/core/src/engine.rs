//! Sequential certification loop and the tuning variant that keeps the
//! running argmin of the surrogate cost, generic over a black-box source of
//! `(candidate, z, x)` draws.

use std::fmt;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaFamily;
use crate::error::{Error, Result};
use crate::estimation::BivariateSample;
use crate::rng::{derive_seed, StreamRng};
use crate::success::p_hat_success;

/// One draw: an opaque candidate, its surrogate cost `z` and its true cost `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw<C> {
    pub candidate: C,
    pub z: f64,
    pub x: f64,
}

/// Source of i.i.d. draws. Implementations are seeded at construction, so
/// the same seed yields the same stream.
pub trait SampleSource {
    type Candidate: Clone;

    fn draw(&mut self) -> Draw<Self::Candidate>;
}

/// A source whose candidates can be re-evaluated on a fresh, independent
/// realisation of the uncertain system.
pub trait FreshTest: SampleSource {
    fn fresh_cost(&self, candidate: &Self::Candidate, seed: u64) -> f64;
}

fn default_initial_n() -> u64 {
    10
}

fn default_max_n() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Performance threshold `J*`; `x ≤ J*` counts toward `α̂`.
    pub j_star: f64,
    #[serde(default = "default_initial_n")]
    pub initial_n: u64,
    #[serde(default = "default_max_n")]
    pub max_n: u64,
    #[serde(default)]
    pub seed: u64,
}

impl EngineConfig {
    pub fn new(delta: f64, beta1: f64, beta2: f64, j_star: f64) -> Self {
        Self {
            delta,
            beta1,
            beta2,
            j_star,
            initial_n: default_initial_n(),
            max_n: default_max_n(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.delta + self.beta1 + self.beta2 >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "delta + beta1 + beta2 must be below 1, got {}",
                self.delta + self.beta1 + self.beta2
            )));
        }
        if !self.j_star.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "j_star must be finite, got {}",
                self.j_star
            )));
        }
        if self.initial_n < 2 {
            return Err(Error::InvalidConfig(format!(
                "initial_n must be at least 2, got {}",
                self.initial_n
            )));
        }
        if self.max_n <= self.initial_n {
            return Err(Error::InvalidConfig(format!(
                "max_n ({}) must exceed initial_n ({})",
                self.max_n, self.initial_n
            )));
        }
        Ok(())
    }

    /// `γ = δ + β₁ + β₂`.
    pub fn gamma(&self) -> f64 {
        self.delta + self.beta1 + self.beta2
    }
}

/// State after the `n`-th draw. `ρ̂` and both bounds are zero while `n < 2`; `checked`
/// is false for draws of the initial sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: u64,
    pub z: f64,
    pub x: f64,
    pub alpha_hat: f64,
    pub rho_hat: f64,
    pub alpha_lcb: f64,
    pub rho_lcb: f64,
    pub p: f64,
    pub omega: Option<f64>,
    pub selected_z: f64,
    pub checked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingReport {
    pub tau: u64,
    pub certified: bool,
    pub p_final: f64,
    pub alpha_hat: f64,
    pub rho_hat: f64,
    pub alpha_lcb: f64,
    pub rho_lcb: f64,
    pub omega: Option<f64>,
    /// 1-based index of the draw with the smallest `z`.
    pub selected_index: u64,
    pub selected_z: f64,
    pub trajectory: Vec<StepRecord>,
}

/// Certified run: the report plus the selected candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuned<C> {
    pub report: StoppingReport,
    pub selected: C,
}

/// The cap was reached without certifying. Carries the full trajectory and
/// the running argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct CapExhausted<C> {
    pub report: StoppingReport,
    pub best: C,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineError<C> {
    Config(Error),
    CapExhausted(Box<CapExhausted<C>>),
}

impl<C> fmt::Display for EngineError<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::CapExhausted(c) => write!(
                f,
                "sample cap of {} reached without certification (last p = {})",
                c.report.tau, c.report.p_final
            ),
        }
    }
}

impl<C: fmt::Debug> std::error::Error for EngineError<C> {}

impl<C> From<Error> for EngineError<C> {
    fn from(e: Error) -> Self {
        Self::Config(e)
    }
}

/// Certified lower bound at the current sample. Zero when either lower
/// confidence bound is not positive or `Ωₙ` is empty.
fn step_record(
    sample: &BivariateSample,
    cfg: &EngineConfig,
    z: f64,
    x: f64,
    selected_z: f64,
) -> StepRecord {
    let n = sample.len() as u64;
    let mut rec = StepRecord {
        n,
        z,
        x,
        alpha_hat: sample.alpha_hat(),
        rho_hat: 0.0,
        alpha_lcb: 0.0,
        rho_lcb: 0.0,
        p: 0.0,
        omega: None,
        selected_z,
        checked: false,
    };
    if n < 2 {
        return rec;
    }
    let lb = sample
        .lower_confidence_bounds(cfg.beta1, cfg.beta2)
        .expect("validated config gives valid widths");
    rec.rho_hat = lb.rho_hat;
    rec.alpha_lcb = lb.alpha_lcb;
    rec.rho_lcb = lb.rho_lcb.min(1.0);
    if rec.alpha_lcb > 0.0 && rec.rho_lcb > 0.0 {
        let b = p_hat_success(n, rec.alpha_lcb.min(1.0), rec.rho_lcb);
        rec.p = b.p;
        rec.omega = b.omega;
    }
    rec
}

fn report(trajectory: Vec<StepRecord>, selected_index: u64, certified: bool) -> StoppingReport {
    let last = *trajectory
        .last()
        .expect("at least the initial sample was drawn");
    StoppingReport {
        tau: last.n,
        certified,
        p_final: last.p,
        alpha_hat: last.alpha_hat,
        rho_hat: last.rho_hat,
        alpha_lcb: last.alpha_lcb,
        rho_lcb: last.rho_lcb,
        omega: last.omega,
        selected_index,
        selected_z: last.selected_z,
        trajectory,
    }
}

/// Tuning loop: draw the initial sample, then draw one at a time and stop at
/// the first `n` whose certified bound reaches `1 - δ`. Returns the draw
/// with the smallest `z` seen so far (first one on ties).
pub fn run_tuning<S: SampleSource>(
    source: &mut S,
    config: &EngineConfig,
) -> std::result::Result<Tuned<S::Candidate>, EngineError<S::Candidate>> {
    config.validate()?;
    let target = 1.0 - config.delta;
    let mut sample = BivariateSample::with_capacity(config.j_star, config.initial_n as usize);
    let mut trajectory = Vec::with_capacity(config.initial_n as usize);
    let mut best: Option<(S::Candidate, f64, u64)> = None;

    loop {
        let n = sample.len() as u64;
        if n >= config.max_n {
            let (best, _, index) = best.expect("cap exceeds initial sample");
            return Err(EngineError::CapExhausted(Box::new(CapExhausted {
                report: report(trajectory, index, false),
                best,
            })));
        }
        let Draw { candidate, z, x } = source.draw();
        sample.push(z, x);
        let n = n + 1;
        if best.as_ref().is_none_or(|b| z < b.1) {
            best = Some((candidate, z, n));
        }
        let selected_z = best.as_ref().map_or(z, |b| b.1);
        let mut rec = step_record(&sample, config, z, x, selected_z);
        rec.checked = n > config.initial_n;
        trajectory.push(rec);
        if rec.checked && rec.p >= target {
            let (selected, _, index) = best.expect("at least one draw");
            return Ok(Tuned {
                report: report(trajectory, index, true),
                selected,
            });
        }
    }
}

/// Certification loop: `run_tuning` without returning the candidate.
pub fn run_certification<S: SampleSource>(
    source: &mut S,
    config: &EngineConfig,
) -> std::result::Result<StoppingReport, EngineError<S::Candidate>> {
    run_tuning(source, config).map(|t| t.report)
}

/// Candidate drawn from a copula source: its draw index and surrogate value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaCandidate {
    pub index: u64,
    pub u: f64,
}

/// Synthetic source with `(Z, X)` from a bivariate copula on the uniform
/// scale. With `J* = α₀` the true `α` equals `α₀`.
#[derive(Debug, Clone)]
pub struct CopulaSource {
    family: CopulaFamily,
    rng: StreamRng,
    drawn: u64,
}

impl CopulaSource {
    pub fn new(family: CopulaFamily, seed: u64) -> Self {
        Self {
            family,
            rng: StreamRng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    pub fn family(&self) -> &CopulaFamily {
        &self.family
    }
}

impl SampleSource for CopulaSource {
    type Candidate = CopulaCandidate;

    fn draw(&mut self) -> Draw<CopulaCandidate> {
        let (u, v) = self.family.sample_pair(&mut self.rng);
        self.drawn += 1;
        Draw {
            candidate: CopulaCandidate {
                index: self.drawn,
                u,
            },
            z: u,
            x: v,
        }
    }
}

impl FreshTest for CopulaSource {
    /// Fresh `X` given the candidate's `Z = u`.
    fn fresh_cost(&self, candidate: &CopulaCandidate, seed: u64) -> f64 {
        let mut rng = StreamRng::seed_from_u64(derive_seed(seed, candidate.index));
        self.family.sample_conditional(candidate.u, &mut rng)
    }
}

/// Outcome of one tune-then-test run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub tau: u64,
    pub certified: bool,
    pub selected_z: f64,
    pub test_cost: f64,
    pub success: bool,
}

/// Run the tuning loop, then evaluate the selected candidate once on a fresh
/// realisation. A cap-exhausted run is tested on its running argmin.
pub fn tune_then_test<S: FreshTest>(
    source: &mut S,
    config: &EngineConfig,
    test_seed: u64,
) -> Result<TestOutcome> {
    let (report, selected) = match run_tuning(source, config) {
        Ok(t) => (t.report, t.selected),
        Err(EngineError::CapExhausted(c)) => (c.report, c.best),
        Err(EngineError::Config(e)) => return Err(e),
    };
    let test_cost = source.fresh_cost(&selected, test_seed);
    Ok(TestOutcome {
        tau: report.tau,
        certified: report.certified,
        selected_z: report.selected_z,
        test_cost,
        success: test_cost <= config.j_star,
    })
}
