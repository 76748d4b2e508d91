use std::path::Path;
use std::process::{Command, Output};

use ordtune_cli::{ExperimentConfig, Overrides, SourceSpec};
use ordtune_core::copula::CopulaFamily;

fn ordtune(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordtune"))
        .args(args)
        .current_dir(dir)
        .env_remove("ORDTUNE_OUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# columns: "));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tune_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ordtune(&["tune", "--seed", "3", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/tune_trajectory.csv"));
    assert_eq!(
        rows[0][..8],
        ["n", "z", "x", "alpha_hat", "rho_hat", "alpha_lcb", "rho_lcb", "p"]
    );
    let s = json(&dir.path().join("o/tune_summary.json"));
    assert_eq!(s["schema"], "ordtune.tune.v1");
    assert_eq!(s["config"]["seed"], 3);
    let tau = s["run_tau"].as_u64().unwrap();
    assert_eq!(rows.len() as u64, tau + 1);
    assert!((1000..30_000).contains(&tau));
    assert!(s["run_p_final"].as_f64().unwrap() >= 0.975);
    assert!(s["runs"][0]["source_seed"].is_u64());
    assert!(s["runs"][0]["test_seed"].is_u64());
}

#[test]
fn repetitions_give_one_row_per_run_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = ordtune(&["tune", "--repetitions", "4", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("o/tune_runs.csv"));
    assert_eq!(rows.len(), 5);
    for (i, r) in rows[1..].iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert!(!r[13].is_empty() && !r[14].is_empty());
    }
    assert!(!dir.path().join("o/tune_trajectory.csv").exists());
    // certify leaves the test columns empty
    ordtune(&["certify", "--repetitions", "2", "--out-dir", "c"], dir.path());
    let rows = csv_rows(&dir.path().join("c/certify_runs.csv"));
    assert!(rows[1][13].is_empty() && rows[1][14].is_empty());
}

#[test]
fn cap_exhaustion_exits_three_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = ordtune(&["certify", "--max-n", "300", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let s = json(&dir.path().join("o/certify_summary.json"));
    assert_eq!(s["cap_exhausted"], 1);
    assert_eq!(s["run_tau"], 300);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "repetitions = 0\n");
    let out = ordtune(&["tune", "--config", &bad], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repetitions"));

    let unknown = write(dir.path(), "unknown.toml", "[engine]\ndelta_typo = 0.1\n");
    let out = ordtune(&["tune", "--config", &unknown], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta_typo"));

    let missing = write(
        dir.path(),
        "missing.toml",
        "[source]\nkind = \"plant\"\nscenario = \"nowhere.toml\"\n",
    );
    let out = ordtune(&["tune", "--config", &missing], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("source.scenario"));

    let out = ordtune(&["tune", "--delta", "0.99"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = ordtune(&["tune", "--config", "absent.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_file_and_env_sets_default_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 5\n[engine]\ndelta = 0.05\n");
    let out = Command::new(env!("CARGO_BIN_EXE_ordtune"))
        .args(["certify", "--config", &cfg, "--seed", "6"])
        .current_dir(dir.path())
        .env("ORDTUNE_OUT_DIR", dir.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = json(&dir.path().join("env/certify_summary.json"));
    assert_eq!(s["config"]["seed"], 6);
    assert_eq!(s["config"]["engine"]["delta"], 0.05);
}

#[test]
fn bound_sweep_marks_uninformative_rows_with_a_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "[bound]\nn_grid = [100, 2000, 5000, 10000, 30000]\n\
         trace = { n = 7500, omega = 0.84, points = 40, alpha0 = 0.1, rho0 = 0.8, delta = 0.1, beta1 = 0.05, beta2 = 0.05 }\n\
         rho0_sweep = { n = 29156, from = 0.7, to = 0.9, points = 5 }\n",
    );
    let out = ordtune(&["bound-sweep", "--config", &cfg, "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("o/bound_sweep.csv"));
    assert_eq!(rows[1][1], "");
    assert_eq!(rows[1][2], "0");
    let values: Vec<f64> = rows[3..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    assert!(values[0] > 0.5);
    let trace = csv_rows(&dir.path().join("o/bound_trace.csv"));
    assert!(trace.len() > 30);
    let s = json(&dir.path().join("o/bound_summary.json"));
    let c = s["rho0_sweep"]["crossing_rho0"].as_f64().unwrap();
    assert!((0.78..=0.82).contains(&c));
}

#[test]
fn oracle_compare_trivial_row_and_violation_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.toml",
        "[oracle]\nns = [20]\nalphas = [1.0]\nrhos = [0.5]\nfrank_lambdas = []\nmc_trials = 1000\n",
    );
    let out = ordtune(&["oracle-compare", "--config", &cfg, "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("o/oracle_compare.csv"));
    for col in [5, 6, 7] {
        assert!((rows[1][col].parse::<f64>().unwrap() - 1.0).abs() < 1e-12, "{:?}", rows[1]);
    }
    // a negative tolerance turns every row into a violation
    let strict = write(
        dir.path(),
        "s.toml",
        "[oracle]\nns = [500]\nalphas = [0.07]\nrhos = [0.5]\nfrank_lambdas = []\nmc_trials = 1000\ntolerance = -1.0\n",
    );
    let out = ordtune(&["oracle-compare", "--config", &strict, "--out-dir", "s"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&dir.path().join("s/oracle_summary.json"))["violations"], 1);
}

#[test]
fn nu_and_scenario_commands_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.toml", "[nu]\ngrids = [100]\n");
    assert_eq!(ordtune(&["nu-estimate", "--config", &cfg, "--out-dir", "o"], dir.path()).status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("o/nu_estimate.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][0], "gaussian");
    assert_eq!(rows[4][5], "0");
    assert_eq!(ordtune(&["scenario-compare", "--out-dir", "o"], dir.path()).status.code(), Some(0));
    let s = json(&dir.path().join("o/scenario_summary.json"));
    assert_eq!(s["n_scenario"], 29156);
}

#[test]
fn config_overrides_reach_every_section() {
    let cfg = ExperimentConfig::load(
        None,
        &Overrides {
            alpha0: Some(0.05),
            rho0: Some(0.9),
            repetitions: Some(7),
            ..Overrides::default()
        },
    )
    .unwrap();
    assert_eq!(cfg.repetitions, 7);
    assert_eq!(cfg.bound.alpha0, 0.05);
    assert_eq!(cfg.bound.rho0, 0.9);
    assert_eq!(
        cfg.source,
        SourceSpec::Copula {
            copula: CopulaFamily::Gaussian { rho: 0.9 },
            alpha0: 0.05
        }
    );
    // the embedded config omits the output directory
    let with_dir = ExperimentConfig {
        out_dir: Some("x".into()),
        ..cfg.clone()
    };
    assert_eq!(with_dir.to_json(), cfg.to_json());
}

#[test]
fn plant_source_reads_a_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "plant.toml",
        "a = [[0.5, 0.1], [0.0, 0.4]]\nb = [[1.0], [0.5]]\nc = [[1.0, 0.0]]\n\
         reference = [[0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]]\n",
    );
    let cfg = write(
        dir.path(),
        "exp.toml",
        "[source]\nkind = \"plant\"\nscenario = \"plant.toml\"\npilot_count = 200\n[engine]\nmax_n = 20000\n",
    );
    let out = ordtune(&["tune", "--config", &cfg, "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("o/tune_summary.json"));
    assert!(s["j_star"].as_f64().unwrap() > 0.0);
    assert!(s["runs"][0]["clamp_events"].is_u64());
}
