//! The six batch commands. Each returns a [`Status`] on completion; output
//! files are written before a nonzero status is reported.

use std::path::Path;
use std::sync::Arc;

use ordtune_bench::{pilot_threshold, PlantScenario, PlantSource, ScenarioConfig};
use ordtune_core::copula::{estimate_nu, estimate_nu_with_floor, CopulaFamily};
use ordtune_core::rng::derive_seed;
use ordtune_core::stopping::{
    inner_objective_trace, optimized_stopping_bound, rho0_crossing, scenario_sample_bound,
};
use ordtune_core::success::{p_hat_success, p_success_gaussian_oracle, p_success_mc_oracle, McMethod};
use ordtune_core::{
    run_tuning, CopulaSource, EngineConfig, EngineError, FreshTest, StepRecord, StoppingBoundQuery,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, SourceSpec};
use crate::output::{finish, num, opt, row, Output};

/// Stream index reserved for the plant pilot run, far above any repetition.
const PILOT_STREAM: u64 = 1 << 48;
/// Stream offset for Monte-Carlo rows of `oracle-compare`.
const MC_STREAM: u64 = 1 << 40;
/// Monte-Carlo agreement is flagged (not failed) beyond this many σ.
const MC_FLAG_SIGMA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CapExhausted,
    Violation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::CapExhausted => 3,
            Self::Violation => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Invalid(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

fn output(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    Output::new(&cfg.output_dir(), cfg.to_json())
}

enum Source {
    Copula(CopulaFamily),
    Plant(Arc<PlantScenario>),
}

struct Resolved {
    source: Source,
    j_star: f64,
}

fn load_scenario(path: Option<&Path>) -> Result<PlantScenario, CliError> {
    let Some(path) = path else {
        return Ok(PlantScenario::default_scenario());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("source.scenario {}: {e}", path.display())))?;
    let sc: ScenarioConfig = toml::from_str(&text)
        .map_err(|e| invalid(format!("source.scenario {}: {e}", path.display())))?;
    sc.build(path.parent().unwrap_or(Path::new(".")))
        .map_err(|e| invalid(format!("source.scenario {}: {e}", path.display())))
}

fn resolve(cfg: &ExperimentConfig) -> Result<Resolved, CliError> {
    match &cfg.source {
        SourceSpec::Copula { copula, alpha0 } => Ok(Resolved {
            source: Source::Copula(*copula),
            j_star: cfg.engine.j_star.unwrap_or(*alpha0),
        }),
        SourceSpec::Plant {
            scenario,
            pilot_quantile,
            pilot_count,
        } => {
            let scenario = Arc::new(load_scenario(scenario.as_deref())?);
            let j_star = match cfg.engine.j_star {
                Some(j) => j,
                None => pilot_threshold(
                    &scenario,
                    derive_seed(cfg.seed, PILOT_STREAM),
                    *pilot_count,
                    *pilot_quantile,
                ),
            };
            Ok(Resolved {
                source: Source::Plant(scenario),
                j_star,
            })
        }
    }
}

/// One engine run as a flat record.
#[derive(Debug, Clone, Serialize)]
struct RunRecord {
    rep: u64,
    source_seed: u64,
    test_seed: Option<u64>,
    tau: u64,
    certified: bool,
    p_final: f64,
    alpha_hat: f64,
    rho_hat: f64,
    alpha_lcb: f64,
    rho_lcb: f64,
    omega: Option<f64>,
    selected_index: u64,
    selected_z: f64,
    test_cost: Option<f64>,
    success: Option<bool>,
    clamp_events: Option<u64>,
    #[serde(skip)]
    trajectory: Vec<StepRecord>,
}

fn run_one<S: FreshTest>(
    source: &mut S,
    config: &EngineConfig,
    rep: u64,
    test_seed: Option<u64>,
    keep_trajectory: bool,
) -> Result<RunRecord, CliError> {
    let (report, selected) = match run_tuning(source, config) {
        Ok(t) => (t.report, t.selected),
        Err(EngineError::CapExhausted(c)) => (c.report, c.best),
        Err(EngineError::Config(e)) => return Err(invalid(e)),
    };
    let test_cost = test_seed.map(|s| source.fresh_cost(&selected, s));
    Ok(RunRecord {
        rep,
        source_seed: config.seed,
        test_seed,
        tau: report.tau,
        certified: report.certified,
        p_final: report.p_final,
        alpha_hat: report.alpha_hat,
        rho_hat: report.rho_hat,
        alpha_lcb: report.alpha_lcb,
        rho_lcb: report.rho_lcb,
        omega: report.omega,
        selected_index: report.selected_index,
        selected_z: report.selected_z,
        test_cost,
        success: test_cost.map(|c| c <= config.j_star),
        clamp_events: None,
        trajectory: if keep_trajectory { report.trajectory } else { Vec::new() },
    })
}

fn median(sorted: &[u64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2] as f64
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2]) as f64
    }
}

/// `tune` (with a fresh test of each selected candidate) and `certify`.
pub fn cmd_engine(cfg: &ExperimentConfig, test: bool) -> Result<Status, CliError> {
    let name = if test { "tune" } else { "certify" };
    let resolved = resolve(cfg)?;
    let base = cfg.engine.engine_config(resolved.j_star, cfg.seed);
    base.validate().map_err(invalid)?;
    let keep = cfg.repetitions == 1;

    let runs: Vec<RunRecord> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let config = EngineConfig {
                seed: derive_seed(cfg.seed, 2 * rep),
                ..base
            };
            let test_seed = test.then(|| derive_seed(cfg.seed, 2 * rep + 1));
            match &resolved.source {
                Source::Copula(family) => {
                    let mut src = CopulaSource::new(*family, config.seed);
                    run_one(&mut src, &config, rep, test_seed, keep)
                }
                Source::Plant(scenario) => {
                    let mut src = PlantSource::new(scenario.clone(), config.seed);
                    let mut rec = run_one(&mut src, &config, rep, test_seed, keep)?;
                    rec.clamp_events = Some(src.clamp_events());
                    Ok(rec)
                }
            }
        })
        .collect::<Result<_, _>>()?;

    let out = output(cfg)?;
    if keep {
        let file = format!("{name}_trajectory.csv");
        let mut w = out.csv(
            &file,
            "n = draws so far; z, x = surrogate and true cost of draw n; alpha_hat, rho_hat = \
             point estimates; alpha_lcb, rho_lcb = lower confidence bounds; p = certified \
             success bound (0 before the first check); omega = maximising omega (empty when \
             inadmissible); selected_z = smallest z so far; checked = 1 once past the initial sample",
            &[
                "n", "z", "x", "alpha_hat", "rho_hat", "alpha_lcb", "rho_lcb", "p", "omega",
                "selected_z", "checked",
            ],
        )?;
        for s in &runs[0].trajectory {
            row(
                &mut w,
                &[
                    s.n.to_string(),
                    num(s.z),
                    num(s.x),
                    num(s.alpha_hat),
                    num(s.rho_hat),
                    num(s.alpha_lcb),
                    num(s.rho_lcb),
                    num(s.p),
                    opt(s.omega),
                    num(s.selected_z),
                    u8::from(s.checked).to_string(),
                ],
            )?;
        }
        finish(w, &file)?;
    }

    let file = format!("{name}_runs.csv");
    let mut w = out.csv(
        &file,
        "rep = repetition index; source_seed, test_seed = derived seeds; tau = stopping time; \
         certified = 1 when stopped below the cap; p_final = certified bound at tau; \
         selected_index = 1-based draw index of the selected candidate; test_cost = fresh cost \
         of the selected candidate; success = 1 when test_cost <= j_star; clamp_events = plant \
         rollouts that hit the state clamp (test columns empty for certify, clamp column empty \
         for copula sources)",
        &[
            "rep", "source_seed", "test_seed", "tau", "certified", "p_final", "alpha_hat",
            "rho_hat", "alpha_lcb", "rho_lcb", "omega", "selected_index", "selected_z",
            "test_cost", "success", "clamp_events",
        ],
    )?;
    for r in &runs {
        row(
            &mut w,
            &[
                r.rep.to_string(),
                r.source_seed.to_string(),
                r.test_seed.map(|s| s.to_string()).unwrap_or_default(),
                r.tau.to_string(),
                u8::from(r.certified).to_string(),
                num(r.p_final),
                num(r.alpha_hat),
                num(r.rho_hat),
                num(r.alpha_lcb),
                num(r.rho_lcb),
                opt(r.omega),
                r.selected_index.to_string(),
                num(r.selected_z),
                opt(r.test_cost),
                r.success.map(|s| u8::from(s).to_string()).unwrap_or_default(),
                r.clamp_events.map(|c| c.to_string()).unwrap_or_default(),
            ],
        )?;
    }
    finish(w, &file)?;

    let mut taus: Vec<u64> = runs.iter().map(|r| r.tau).collect();
    taus.sort_unstable();
    let certified = runs.iter().filter(|r| r.certified).count();
    let mut fields = Map::new();
    fields.insert("seed".into(), json!(cfg.seed));
    fields.insert("j_star".into(), json!(resolved.j_star));
    fields.insert("gamma".into(), json!(base.gamma()));
    fields.insert("repetitions".into(), json!(cfg.repetitions));
    fields.insert("certified".into(), json!(certified));
    fields.insert("cap_exhausted".into(), json!(runs.len() - certified));
    fields.insert(
        "tau".into(),
        json!({
            "min": taus[0],
            "median": median(&taus),
            "max": taus[taus.len() - 1],
            "mean": taus.iter().sum::<u64>() as f64 / taus.len() as f64,
        }),
    );
    if test {
        let k = runs.len() as f64;
        let freq = runs.iter().filter(|r| r.success == Some(true)).count() as f64 / k;
        fields.insert(
            "test".into(),
            json!({
                "success_frequency": freq,
                "std_error": (freq * (1.0 - freq) / k).sqrt(),
                "target": 1.0 - base.gamma(),
            }),
        );
    }
    if keep {
        let r = &runs[0];
        for (k, v) in [
            ("tau", json!(r.tau)),
            ("selected_index", json!(r.selected_index)),
            ("selected_z", json!(r.selected_z)),
            ("p_final", json!(r.p_final)),
        ] {
            fields.insert(format!("run_{k}"), v);
        }
    }
    fields.insert("runs".into(), serde_json::to_value(&runs).expect("runs serialise"));
    out.json(&format!("{name}_summary.json"), &format!("ordtune.{name}.v1"), fields)?;

    println!(
        "{name}: {} run(s), {certified} certified, median tau {}, outputs in {}",
        runs.len(),
        median(&taus),
        out.dir().display()
    );
    Ok(if certified == runs.len() {
        Status::Ok
    } else {
        Status::CapExhausted
    })
}

fn bound_query(cfg: &ExperimentConfig, n: u64, alpha0: f64, rho0: f64) -> StoppingBoundQuery {
    StoppingBoundQuery {
        n,
        alpha0,
        rho0,
        delta: cfg.engine.delta,
        beta1: cfg.engine.beta1,
        beta2: cfg.engine.beta2,
    }
}

fn bound_fields(b: &ordtune_core::stopping::OptimizedStoppingBound) -> [String; 5] {
    [
        opt(b.bound.value()),
        u8::from(b.bound.is_informative()).to_string(),
        opt(b.omega),
        opt(b.alpha_star),
        opt(b.rho_star),
    ]
}

const BOUND_COLUMNS: &str = "bound = optimised lower bound on P(tau <= n), empty when \
    uninformative; informative = 0 when no admissible omega or alpha exists (the bound is then \
    a sentinel, not zero); omega, alpha_star, rho_star = optimiser location";

/// `bound-sweep`: the optimised stopping-time bound on an n grid, with an
/// optional inner-objective trace and `ρ₀` sweep.
pub fn cmd_bound_sweep(cfg: &ExperimentConfig) -> Result<Status, CliError> {
    let b = &cfg.bound;
    let grid = b.grid();
    bound_query(cfg, grid[0], b.alpha0, b.rho0)
        .validate()
        .map_err(invalid)?;
    let bounds: Vec<_> = grid
        .par_iter()
        .map(|&n| optimized_stopping_bound(&bound_query(cfg, n, b.alpha0, b.rho0)))
        .collect::<Result<_, _>>()
        .map_err(invalid)?;

    let out = output(cfg)?;
    let mut w = out.csv(
        "bound_sweep.csv",
        &format!("n = sample size; {BOUND_COLUMNS}"),
        &["n", "bound", "informative", "omega", "alpha_star", "rho_star"],
    )?;
    for (n, bd) in grid.iter().zip(&bounds) {
        let mut fields = vec![n.to_string()];
        fields.extend(bound_fields(bd));
        row(&mut w, &fields)?;
    }
    finish(w, "bound_sweep.csv")?;

    let mut fields = Map::new();
    let first_at = |level: f64| {
        grid.iter()
            .zip(&bounds)
            .find(|(_, bd)| bd.bound.value().is_some_and(|v| v >= level))
            .map(|(n, _)| *n)
    };
    fields.insert("points".into(), json!(grid.len()));
    fields.insert("first_informative_n".into(), json!(grid
        .iter()
        .zip(&bounds)
        .find(|(_, bd)| bd.bound.is_informative())
        .map(|(n, _)| *n)));
    fields.insert("first_n_at_half".into(), json!(first_at(0.5)));

    if let Some(t) = &b.trace {
        let q = StoppingBoundQuery {
            n: t.n,
            alpha0: t.alpha0.unwrap_or(b.alpha0),
            rho0: t.rho0.unwrap_or(b.rho0),
            delta: t.delta.unwrap_or(cfg.engine.delta),
            beta1: t.beta1.unwrap_or(cfg.engine.beta1),
            beta2: t.beta2.unwrap_or(cfg.engine.beta2),
        };
        let trace = inner_objective_trace(&q, t.omega, t.points).map_err(invalid)?;
        let mut w = out.csv(
            "bound_trace.csv",
            "alpha, rho = point on the front at the configured n and omega; objective = \
             two-term tail sum; bound = 1 - objective",
            &["alpha", "rho", "objective", "bound"],
        )?;
        for p in &trace {
            row(&mut w, &[num(p.alpha), num(p.rho), num(p.objective), num(p.bound)])?;
        }
        finish(w, "bound_trace.csv")?;
        let best = trace.iter().min_by(|a, b| a.objective.total_cmp(&b.objective));
        fields.insert(
            "trace".into(),
            json!({
                "points": trace.len(),
                "min_objective": best.map(|p| p.objective),
                "argmin_alpha": best.map(|p| p.alpha),
            }),
        );
    }

    if let Some(s) = &b.rho0_sweep {
        let k = s.points.max(2) - 1;
        let rhos: Vec<f64> = (0..=k)
            .map(|i| s.from + (s.to - s.from) * i as f64 / k as f64)
            .collect();
        let sweep: Vec<_> = rhos
            .par_iter()
            .map(|&r| optimized_stopping_bound(&bound_query(cfg, s.n, b.alpha0, r)))
            .collect::<Result<_, _>>()
            .map_err(invalid)?;
        let crossing = rho0_crossing(&bound_query(cfg, s.n, b.alpha0, s.to), s.level, s.from, s.to)
            .map_err(invalid)?;
        let mut w = out.csv(
            "bound_rho0_sweep.csv",
            &format!("rho0 = true associated correlation at the configured n; {BOUND_COLUMNS}"),
            &["rho0", "bound", "informative", "omega", "alpha_star", "rho_star"],
        )?;
        for (r, bd) in rhos.iter().zip(&sweep) {
            let mut fields = vec![num(*r)];
            fields.extend(bound_fields(bd));
            row(&mut w, &fields)?;
        }
        finish(w, "bound_rho0_sweep.csv")?;
        fields.insert(
            "rho0_sweep".into(),
            json!({ "n": s.n, "level": s.level, "crossing_rho0": crossing }),
        );
    }

    out.json("bound_summary.json", "ordtune.bound-sweep.v1", fields)?;
    println!("bound-sweep: {} points, outputs in {}", grid.len(), out.dir().display());
    Ok(Status::Ok)
}

struct OracleRow {
    family: &'static str,
    n: u64,
    alpha: f64,
    param: f64,
    associated_rho: f64,
    bound: f64,
    oracle: f64,
    mc: f64,
    mc_stderr: f64,
    nu: Option<f64>,
    violation: bool,
    mc_flag: bool,
}

/// `oracle-compare`: certified bound vs quadrature vs Monte Carlo on the
/// Gaussian grid, plus Frank rows checked against the `ν` shortfall.
pub fn cmd_oracle_compare(cfg: &ExperimentConfig) -> Result<Status, CliError> {
    let o = &cfg.oracle;
    let mut specs: Vec<(CopulaFamily, u64, f64)> = Vec::new();
    for &n in &o.ns {
        for &a in &o.alphas {
            for &r in &o.rhos {
                specs.push((CopulaFamily::Gaussian { rho: r }, n, a));
            }
        }
    }
    for &l in &o.frank_lambdas {
        for &n in &o.ns {
            for &a in &o.alphas {
                specs.push((CopulaFamily::Frank { lambda: l }, n, a));
            }
        }
    }
    let nus: Vec<(f64, f64)> = o
        .frank_lambdas
        .par_iter()
        .map(|&l| {
            estimate_nu_with_floor(&CopulaFamily::Frank { lambda: l }, o.nu_grid, o.nu_z_floor)
                .map(|e| (l, e.nu))
        })
        .collect::<Result<_, _>>()
        .map_err(invalid)?;

    let rows: Vec<OracleRow> = specs
        .iter()
        .enumerate()
        .map(|(i, &(family, n, alpha))| {
            let rho = family.associated_rho();
            let bound = p_hat_success(n, alpha, rho).p;
            let oracle = p_success_gaussian_oracle(n, alpha, rho);
            let mc = p_success_mc_oracle(
                &family,
                n,
                1,
                alpha,
                o.mc_trials,
                derive_seed(cfg.seed, MC_STREAM + i as u64),
                McMethod::auto(n, 1),
            )
            .map_err(invalid)?;
            let sigma = (oracle * (1.0 - oracle) / o.mc_trials as f64).sqrt();
            Ok(match family {
                CopulaFamily::Gaussian { rho } => OracleRow {
                    family: "gaussian",
                    n,
                    alpha,
                    param: rho,
                    associated_rho: rho,
                    bound,
                    oracle,
                    mc: mc.estimate,
                    mc_stderr: mc.std_error,
                    nu: None,
                    violation: bound > oracle + o.tolerance,
                    mc_flag: (mc.estimate - oracle).abs() > MC_FLAG_SIGMA * sigma + 1e-12,
                },
                CopulaFamily::Frank { lambda } => {
                    let nu = nus.iter().find(|(l, _)| *l == lambda).map(|p| p.1).unwrap_or(0.0);
                    OracleRow {
                        family: "frank",
                        n,
                        alpha,
                        param: lambda,
                        associated_rho: rho,
                        bound,
                        oracle,
                        mc: mc.estimate,
                        mc_stderr: mc.std_error,
                        nu: Some(nu),
                        violation: oracle - mc.estimate > nu + 3.0 * mc.std_error,
                        mc_flag: false,
                    }
                }
            })
        })
        .collect::<Result<_, CliError>>()?;

    let out = output(cfg)?;
    let mut w = out.csv(
        "oracle_compare.csv",
        "family = copula of the simulated pairs; param = rho (gaussian) or lambda (frank); \
         associated_rho = correlation of the associated Gaussian copula; bound = certified \
         success bound at associated_rho; quadrature_oracle = exact Gaussian success \
         probability at associated_rho; mc_estimate, mc_stderr = simulated success probability \
         of the family itself; oracle_minus_mc = quadrature_oracle - mc_estimate; nu = lattice \
         shortfall estimate (frank only); violation = 1 when bound exceeds quadrature_oracle \
         by more than the tolerance (gaussian) or oracle_minus_mc exceeds nu + 3 mc_stderr \
         (frank); mc_flag = 1 when a gaussian mc_estimate is more than 5 sigma from quadrature",
        &[
            "family", "n", "alpha", "param", "associated_rho", "bound", "quadrature_oracle",
            "mc_estimate", "mc_stderr", "oracle_minus_mc", "nu", "violation", "mc_flag",
        ],
    )?;
    for r in &rows {
        row(
            &mut w,
            &[
                r.family.to_string(),
                r.n.to_string(),
                num(r.alpha),
                num(r.param),
                num(r.associated_rho),
                num(r.bound),
                num(r.oracle),
                num(r.mc),
                num(r.mc_stderr),
                num(r.oracle - r.mc),
                opt(r.nu),
                u8::from(r.violation).to_string(),
                u8::from(r.mc_flag).to_string(),
            ],
        )?;
    }
    finish(w, "oracle_compare.csv")?;

    let violations = rows.iter().filter(|r| r.violation).count();
    let worst = rows
        .iter()
        .filter(|r| r.family == "gaussian")
        .map(|r| r.oracle - r.bound)
        .fold(f64::INFINITY, f64::min);
    let mut fields = Map::new();
    fields.insert("rows".into(), json!(rows.len()));
    fields.insert("violations".into(), json!(violations));
    fields.insert("mc_flags".into(), json!(rows.iter().filter(|r| r.mc_flag).count()));
    fields.insert("min_domination_margin".into(), json!(worst.is_finite().then_some(worst)));
    fields.insert(
        "nu".into(),
        Value::Array(nus.iter().map(|(l, nu)| json!({ "lambda": l, "nu": nu })).collect()),
    );
    out.json("oracle_summary.json", "ordtune.oracle-compare.v1", fields)?;
    println!(
        "oracle-compare: {} rows, {violations} violation(s), outputs in {}",
        rows.len(),
        out.dir().display()
    );
    Ok(if violations == 0 { Status::Ok } else { Status::Violation })
}

fn family_parts(f: &CopulaFamily) -> (&'static str, f64) {
    match *f {
        CopulaFamily::Gaussian { rho } => ("gaussian", rho),
        CopulaFamily::Frank { lambda } => ("frank", lambda),
    }
}

/// `nu-estimate`: lattice estimates of the conditional-CDF shortfall `ν`.
pub fn cmd_nu_estimate(cfg: &ExperimentConfig) -> Result<Status, CliError> {
    let nu = &cfg.nu;
    let specs: Vec<(CopulaFamily, usize)> = nu
        .families
        .iter()
        .flat_map(|f| nu.grids.iter().map(move |&g| (*f, g)))
        .collect();
    let estimates: Vec<_> = specs
        .par_iter()
        .map(|(f, g)| match nu.z_floor {
            Some(z) => estimate_nu_with_floor(f, *g, z),
            None => estimate_nu(f, *g),
        })
        .collect::<Result<_, _>>()
        .map_err(invalid)?;

    let out = output(cfg)?;
    let mut w = out.csv(
        "nu_estimate.csv",
        "family, param = copula and its parameter (rho or lambda); kendall = population Kendall \
         correlation; associated_rho = correlation of the associated Gaussian copula; grid = \
         lattice size; nu = largest shortfall of the conditional CDF below the Gaussian one; \
         at_z, at_x = where it was attained (empty when nu is zero)",
        &["family", "param", "kendall", "associated_rho", "grid", "nu", "at_z", "at_x"],
    )?;
    let mut items = Vec::new();
    for ((f, _), e) in specs.iter().zip(&estimates) {
        let (name, param) = family_parts(f);
        let at = |v: f64| (v.is_finite()).then_some(v);
        row(
            &mut w,
            &[
                name.to_string(),
                num(param),
                num(f.kendall()),
                num(e.associated_rho),
                e.grid.to_string(),
                num(e.nu),
                opt(at(e.at_z)),
                opt(at(e.at_x)),
            ],
        )?;
        items.push(json!({ "family": name, "param": param, "grid": e.grid, "nu": e.nu }));
    }
    finish(w, "nu_estimate.csv")?;
    let mut fields = Map::new();
    fields.insert("estimates".into(), Value::Array(items));
    out.json("nu_summary.json", "ordtune.nu-estimate.v1", fields)?;
    println!("nu-estimate: {} estimates, outputs in {}", estimates.len(), out.dir().display());
    Ok(Status::Ok)
}

/// `scenario-compare`: the scenario-approach sample count against the
/// optimised stopping bound across `ρ₀`.
pub fn cmd_scenario_compare(cfg: &ExperimentConfig) -> Result<Status, CliError> {
    let s = &cfg.scenario_compare;
    let n_s = scenario_sample_bound(s.epsilon, s.eta, s.d).map_err(invalid)?;
    let k = s.rho_points.max(2) - 1;
    let rhos: Vec<f64> = (0..=k)
        .map(|i| s.rho_from + (s.rho_to - s.rho_from) * i as f64 / k as f64)
        .collect();
    bound_query(cfg, n_s, s.alpha0, s.rho_to).validate().map_err(invalid)?;
    let bounds: Vec<_> = rhos
        .par_iter()
        .map(|&r| optimized_stopping_bound(&bound_query(cfg, n_s, s.alpha0, r)))
        .collect::<Result<_, _>>()
        .map_err(invalid)?;
    let crossing = rho0_crossing(&bound_query(cfg, n_s, s.alpha0, s.rho_to), s.level, s.rho_from, s.rho_to)
        .map_err(invalid)?;

    let out = output(cfg)?;
    let mut w = out.csv(
        "scenario_compare.csv",
        &format!(
            "rho0 = true associated correlation; bound evaluated at the scenario sample count \
             n_scenario; reaches_level = 1 when bound >= level; {BOUND_COLUMNS}"
        ),
        &["rho0", "n_scenario", "bound", "informative", "omega", "alpha_star", "rho_star", "reaches_level"],
    )?;
    for (r, bd) in rhos.iter().zip(&bounds) {
        let mut fields = vec![num(*r), n_s.to_string()];
        fields.extend(bound_fields(bd));
        let reaches = bd.bound.value().is_some_and(|v| v >= s.level);
        fields.push(u8::from(reaches).to_string());
        row(&mut w, &fields)?;
    }
    finish(w, "scenario_compare.csv")?;
    let mut fields = Map::new();
    fields.insert("n_scenario".into(), json!(n_s));
    fields.insert("level".into(), json!(s.level));
    fields.insert("crossing_rho0".into(), json!(crossing));
    out.json("scenario_summary.json", "ordtune.scenario-compare.v1", fields)?;
    match crossing {
        Some(c) => println!("scenario-compare: n_scenario {n_s}, crossing rho0 {c:.4}"),
        None => println!("scenario-compare: n_scenario {n_s}, no crossing in range"),
    }
    Ok(Status::Ok)
}
