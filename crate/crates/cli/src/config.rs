//! Experiment configuration: one TOML file per run, with command-line flags
//! layered on top. Every section has defaults that reproduce the reference
//! setting (α₀ = 0.07, ρ₀ = 0.9792, δ = 0.025, β₁ = β₂ = 0.0125).

use std::path::{Path, PathBuf};

use ordtune_core::copula::CopulaFamily;
use ordtune_core::EngineConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ORDTUNE_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default)]
    pub bound: BoundSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub nu: NuSection,
    #[serde(default)]
    pub scenario_compare: ScenarioCompareSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repetitions: 1,
            out_dir: None,
            engine: EngineSection::default(),
            source: SourceSpec::default(),
            bound: BoundSection::default(),
            oracle: OracleSection::default(),
            nu: NuSection::default(),
            scenario_compare: ScenarioCompareSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSection {
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Performance threshold. Copula sources default to `alpha0`; plant
    /// sources default to a pilot quantile.
    pub j_star: Option<f64>,
    pub initial_n: u64,
    pub max_n: u64,
}

impl Default for EngineSection {
    fn default() -> Self {
        Self {
            delta: 0.025,
            beta1: 0.0125,
            beta2: 0.0125,
            j_star: None,
            initial_n: 10,
            max_n: 1_000_000,
        }
    }
}

impl EngineSection {
    pub fn engine_config(&self, j_star: f64, seed: u64) -> EngineConfig {
        EngineConfig {
            delta: self.delta,
            beta1: self.beta1,
            beta2: self.beta2,
            j_star,
            initial_n: self.initial_n,
            max_n: self.max_n,
            seed,
        }
    }
}

fn default_alpha0() -> f64 {
    0.07
}

fn default_copula() -> CopulaFamily {
    CopulaFamily::Gaussian { rho: 0.9792 }
}

fn default_pilot_quantile() -> f64 {
    0.1
}

fn default_pilot_count() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Synthetic `(Z, X)` on the uniform scale. `J* = alpha0` gives `α = alpha0`.
    Copula {
        #[serde(default = "default_copula")]
        copula: CopulaFamily,
        #[serde(default = "default_alpha0")]
        alpha0: f64,
    },
    /// Perturbed linear plant benchmark; `scenario` is a TOML file, or the
    /// shipped default scenario when absent.
    Plant {
        #[serde(default)]
        scenario: Option<PathBuf>,
        #[serde(default = "default_pilot_quantile")]
        pilot_quantile: f64,
        #[serde(default = "default_pilot_count")]
        pilot_count: usize,
    },
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self::Copula {
            copula: default_copula(),
            alpha0: default_alpha0(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    pub alpha0: f64,
    pub rho0: f64,
    /// Explicit n grid; when empty, `n_points` log-spaced values in
    /// `[n_min, n_max]`.
    pub n_grid: Vec<u64>,
    pub n_min: u64,
    pub n_max: u64,
    pub n_points: usize,
    pub trace: Option<TraceSpec>,
    pub rho0_sweep: Option<SweepSpec>,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self {
            alpha0: 0.07,
            rho0: 0.9792,
            n_grid: Vec::new(),
            n_min: 1000,
            n_max: 30_000,
            n_points: 30,
            trace: None,
            rho0_sweep: None,
        }
    }
}

impl BoundSection {
    pub fn grid(&self) -> Vec<u64> {
        if !self.n_grid.is_empty() {
            return self.n_grid.clone();
        }
        log_grid(self.n_min, self.n_max, self.n_points)
    }
}

/// `points` integers log-spaced over `[lo, hi]`, deduplicated.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    if points <= 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    v.dedup();
    v
}

/// Inner objective along the front at one `(n, ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub n: u64,
    pub omega: f64,
    #[serde(default = "default_trace_points")]
    pub points: usize,
    /// Overrides for the trace's own `α₀`, `ρ₀`, `δ`, `β₁`, `β₂`.
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default)]
    pub beta2: Option<f64>,
}

fn default_trace_points() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: u64,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_level() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub ns: Vec<u64>,
    pub alphas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Frank rows are evaluated at every `n` and `α` of the grid.
    pub frank_lambdas: Vec<f64>,
    pub mc_trials: u64,
    pub tolerance: f64,
    pub nu_grid: usize,
    pub nu_z_floor: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            ns: vec![500, 1000, 2658, 7500, 30_000],
            alphas: vec![0.01, 0.05, 0.07, 0.1, 0.3],
            rhos: vec![0.3, 0.5, 0.8, 0.9792],
            frank_lambdas: vec![5.0],
            mc_trials: 100_000,
            tolerance: 1e-9,
            nu_grid: 500,
            nu_z_floor: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NuSection {
    pub families: Vec<CopulaFamily>,
    pub grids: Vec<usize>,
    /// Adds log-spaced corner points down to this `z` when set.
    pub z_floor: Option<f64>,
}

impl Default for NuSection {
    fn default() -> Self {
        Self {
            families: vec![
                CopulaFamily::Frank { lambda: 2.0 },
                CopulaFamily::Frank { lambda: 5.0 },
                CopulaFamily::Frank { lambda: 10.0 },
                CopulaFamily::Gaussian { rho: 0.7 },
            ],
            grids: vec![100, 500],
            z_floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioCompareSection {
    pub epsilon: f64,
    pub eta: f64,
    pub d: u64,
    pub alpha0: f64,
    pub rho_from: f64,
    pub rho_to: f64,
    pub rho_points: usize,
    pub level: f64,
}

impl Default for ScenarioCompareSection {
    fn default() -> Self {
        Self {
            epsilon: 0.0499,
            eta: 1e-4,
            d: 192,
            alpha0: 0.07,
            rho_from: 0.7,
            rho_to: 0.9,
            rho_points: 21,
            level: 0.5,
        }
    }
}

/// Flag overrides; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub repetitions: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub delta: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub j_star: Option<f64>,
    pub initial_n: Option<u64>,
    pub max_n: Option<u64>,
    pub alpha0: Option<f64>,
    pub rho0: Option<f64>,
    pub mc_trials: Option<u64>,
}

impl ExperimentConfig {
    /// Parse a file (or take defaults), apply overrides, resolve relative
    /// paths against the file's directory, and validate.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let (mut cfg, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                    path: p.display().to_string(),
                    source: e,
                })?;
                let cfg: Self = toml::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (Self::default(), PathBuf::new()),
        };
        cfg.apply(overrides);
        if let SourceSpec::Plant {
            scenario: Some(s), ..
        } = &mut cfg.source
        {
            if s.is_relative() {
                *s = base.join(&*s);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.repetitions {
            self.repetitions = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = Some(v.clone());
        }
        let e = &mut self.engine;
        if let Some(v) = o.delta {
            e.delta = v;
        }
        if let Some(v) = o.beta1 {
            e.beta1 = v;
        }
        if let Some(v) = o.beta2 {
            e.beta2 = v;
        }
        if o.j_star.is_some() {
            e.j_star = o.j_star;
        }
        if let Some(v) = o.initial_n {
            e.initial_n = v;
        }
        if let Some(v) = o.max_n {
            e.max_n = v;
        }
        if let Some(v) = o.alpha0 {
            self.bound.alpha0 = v;
            self.scenario_compare.alpha0 = v;
            if let SourceSpec::Copula { alpha0, .. } = &mut self.source {
                *alpha0 = v;
            }
        }
        if let Some(v) = o.rho0 {
            self.bound.rho0 = v;
            if let SourceSpec::Copula {
                copula: CopulaFamily::Gaussian { rho },
                ..
            } = &mut self.source
            {
                *rho = v;
            }
        }
        if let Some(v) = o.mc_trials {
            self.oracle.mc_trials = v;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.repetitions < 1 {
            return Err(field("repetitions", "must be at least 1"));
        }
        // j_star is checked once resolved; use a placeholder here
        self.engine
            .engine_config(0.0, self.seed)
            .validate()
            .map_err(|e| field("engine", e))?;
        match &self.source {
            SourceSpec::Copula { copula, alpha0 } => {
                validate_family("source.copula", copula)?;
                if !(*alpha0 > 0.0 && *alpha0 < 1.0) {
                    return Err(field("source.alpha0", "must lie in (0, 1)"));
                }
            }
            SourceSpec::Plant {
                scenario,
                pilot_quantile,
                pilot_count,
            } => {
                if let Some(p) = scenario {
                    if !p.is_file() {
                        return Err(field("source.scenario", format!("{} does not exist", p.display())));
                    }
                }
                if !(*pilot_quantile > 0.0 && *pilot_quantile < 1.0) {
                    return Err(field("source.pilot_quantile", "must lie in (0, 1)"));
                }
                if *pilot_count < 10 {
                    return Err(field("source.pilot_count", "must be at least 10"));
                }
            }
        }
        let b = &self.bound;
        for (name, v) in [("bound.alpha0", b.alpha0), ("bound.rho0", b.rho0)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(field(name, "must lie in (0, 1]"));
            }
        }
        if b.n_grid.is_empty() && !(b.n_min >= 2 && b.n_max >= b.n_min && b.n_points >= 1) {
            return Err(field("bound.n_min", "need 2 <= n_min <= n_max and n_points >= 1"));
        }
        if b.n_grid.iter().any(|&n| n < 2) {
            return Err(field("bound.n_grid", "every n must be at least 2"));
        }
        if let Some(s) = &b.rho0_sweep {
            if !(s.from > 0.0 && s.to <= 1.0 && s.from <= s.to && s.points >= 1 && s.n >= 2) {
                return Err(field("bound.rho0_sweep", "need 0 < from <= to <= 1, points >= 1, n >= 2"));
            }
        }
        let o = &self.oracle;
        if o.ns.iter().any(|&n| n < 1) || o.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(field("oracle", "n must be >= 1 and alpha in (0, 1]"));
        }
        if o.rhos.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(field("oracle.rhos", "must lie in (0, 1)"));
        }
        for &l in &o.frank_lambdas {
            CopulaFamily::frank(l).map_err(|e| field("oracle.frank_lambdas", e))?;
        }
        if o.mc_trials < 1 {
            return Err(field("oracle.mc_trials", "must be at least 1"));
        }
        if o.nu_grid < 100 {
            return Err(field("oracle.nu_grid", "must be at least 100"));
        }
        for f in &self.nu.families {
            validate_family("nu.families", f)?;
        }
        if self.nu.grids.iter().any(|&g| g < 100) {
            return Err(field("nu.grids", "every grid must be at least 100"));
        }
        let s = &self.scenario_compare;
        if !(s.epsilon > 0.0 && s.epsilon < 1.0 && s.eta > 0.0 && s.eta < 1.0 && s.d >= 1) {
            return Err(field("scenario_compare", "need epsilon, eta in (0, 1) and d >= 1"));
        }
        if !(s.rho_from > 0.0 && s.rho_to <= 1.0 && s.rho_from <= s.rho_to && s.rho_points >= 1) {
            return Err(field("scenario_compare.rho_from", "need 0 < rho_from <= rho_to <= 1"));
        }
        Ok(())
    }

    /// Output directory: flag or file value, else the environment, else `.`.
    pub fn output_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Resolved config as compact JSON, with the output directory dropped so
    /// that identical runs into different directories embed identical text.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("out_dir");
        }
        v.to_string()
    }
}

fn validate_family(name: &str, f: &CopulaFamily) -> Result<(), ConfigError> {
    let checked = match *f {
        CopulaFamily::Gaussian { rho } => CopulaFamily::gaussian(rho),
        CopulaFamily::Frank { lambda } => CopulaFamily::frank(lambda),
    };
    checked.map(|_| ()).map_err(|e| field(name, e))
}
