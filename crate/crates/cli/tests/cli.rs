use std::path::Path;
use std::process::{Command, Output};

use matmono::harness::{Baseline, ConstraintTemplate, ExperimentConfig, ExperimentRegime, ObjectiveTemplate, Sweep, SweepVar, EXPERIMENT_SCHEMA};
use matmono::linalg::{CMatrix, HermitianPsd};
use matmono::model::json::scenario_to_json;
use matmono::model::{ConstraintSet, Objective, Regime, Scenario};
use matmono::scalar::C;

fn run(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_matmono"));
    cmd.args(args).env_remove("MATMONO_SEED");
    if let Some(s) = seed {
        cmd.env("MATMONO_SEED", s);
    }
    cmd.output().unwrap()
}

fn h() -> CMatrix<f64> {
    CMatrix::from_fn(3, 3, |i, j| C::new(1.0 / (1 + i + j) as f64, 0.1 * (i as f64 - j as f64)))
}

fn write_scenario(dir: &Path, name: &str, regime: Regime<f64>, constraints: ConstraintSet<f64>, streams: usize) -> String {
    let s = Scenario { regime, noise_var: 0.1, streams, constraints, objective: Objective::sum_mse(streams) };
    let p = dir.join(name);
    std::fs::write(&p, scenario_to_json(&s).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn experiment(dir: &Path, seed: u64) -> String {
    let cfg = ExperimentConfig {
        schema: EXPERIMENT_SCHEMA.into(),
        regime: ExperimentRegime::Bayes,
        nt: 3,
        nr: 3,
        streams: 2,
        power: 1.0,
        constraints: ConstraintTemplate::SumPower,
        objective: ObjectiveTemplate::SumMse,
        snr_db: 10.0,
        sigma_e2: 0.1,
        rho: 0.5,
        s_rel: 0.2,
        step_b: 1.0,
        eps_rel: 1e-4,
        sweep: Sweep { var: SweepVar::SigmaE2, grid: vec![0.05, 0.1] },
        trials: 4,
        seed,
        baselines: vec![Baseline::Naive, Baseline::Proposed],
    };
    let p = dir.join(format!("exp{seed}.json"));
    std::fs::write(&p, cfg.to_json().unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn design_writes_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "s.json", Regime::Perfect { h: h() }, ConstraintSet::SumPower { p: 1.0 }, 2);
    let out = dir.path().join("sol.json");
    let o = run(&["design", &sc, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("\"matmono-solution-1\"") && text.contains("\"objective_value\""));
    let o = run(&["design", &sc], None);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), text.trim());
}

#[test]
fn validate_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "w.json", Regime::WorstCase { h_hat: h(), gamma: 0.2 }, ConstraintSet::SumPower { p: 1.0 }, 2);
    let o = run(&["validate", &sc], Some("17"));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS worst-case floor") && !text.contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": \"nope\"}").unwrap();
    assert_eq!(run(&["design", bad.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(run(&["sweep", bad.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(run(&["design", "/nonexistent/x.json"], None).status.code(), Some(2));
    let sc = write_scenario(
        dir.path(),
        "shape.json",
        Regime::Perfect { h: h() },
        ConstraintSet::Shaping { rs: HermitianPsd::identity(3) },
        1,
    );
    assert_eq!(run(&["design", &sc], None).status.code(), Some(3));
    let exp = experiment(dir.path(), 1);
    assert_eq!(run(&["sweep", &exp], Some("x")).status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["sweep", &experiment(dir.path(), 1)], None);
    let b = run(&["sweep", &experiment(dir.path(), 2)], Some("1"));
    let c = run(&["sweep", &experiment(dir.path(), 2)], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("sweep_var,value,baseline,metric,stderr,trials\n"));
    assert_eq!(text.lines().count(), 5);
}
