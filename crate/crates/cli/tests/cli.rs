use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use orthoalg_core::gen::{random_unitary, trial_rng};
use orthoalg_core::linalg::{self, CMat};
use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    /// The final `report` record of a jsonl run.
    fn report(&self) -> Value {
        let last = self.stdout.lines().last().expect("no output");
        let v: Value = serde_json::from_str(last).expect("report line is JSON");
        assert_eq!(v["record"], "report");
        v
    }

    fn records(&self, kind: &str) -> Vec<Value> {
        self.stdout
            .lines()
            .map(|l| serde_json::from_str::<Value>(l).unwrap())
            .filter(|v| v["record"] == kind)
            .collect()
    }
}

fn orthoalg(dir: &Path, args: &[&str]) -> Run {
    orthoalg_env(dir, args, &[])
}

fn orthoalg_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orthoalg"));
    cmd.current_dir(dir).args(args).env_remove("ORTHOALG_TOL_PROFILE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write_matrix(dir: &Path, name: &str, m: &CMat) -> PathBuf {
    let path = dir.join(name);
    let body = json!({ "dim": m.nrows(), "entries": linalg::to_entries(m) });
    fs::write(&path, body.to_string()).unwrap();
    path
}

fn diag(dir: &Path, name: &str, values: &[f64]) -> String {
    write_matrix(dir, name, &linalg::real_diag(values));
    name.to_string()
}

fn read_matrix(path: &Path) -> CMat {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let entries: Vec<Vec<[f64; 2]>> = serde_json::from_value(v["entries"].clone()).unwrap();
    linalg::from_entries(&entries).unwrap()
}

fn strip_wall_time(s: &str) -> String {
    s.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            if let Value::Object(m) = &mut v {
                m.remove("wall_time_ms");
            }
            v.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn check_orth_lists_five_true_criteria() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0, 0.0]);
    let b = diag(t.path(), "b.json", &[0.0, 2.0, 0.0]);
    let r = orthoalg(t.path(), &["check", "orth", &a, &b, "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report();
    for k in ["range_orthogonal", "ran_a_in_null_b", "ran_b_in_null_a", "ab_zero", "ba_zero", "orthogonal"] {
        assert_eq!(rep["verdicts"][k], true, "{k}");
    }
    let text = orthoalg(t.path(), &["check", "orth", &a, &b]);
    assert_eq!(text.code, 0);
    assert_eq!(text.stdout.lines().filter(|l| l.trim_start().starts_with('(')).count(), 5);
}

#[test]
fn check_orth_fails_on_overlap() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 1.0]);
    let b = diag(t.path(), "b.json", &[0.0, 2.0]);
    let r = orthoalg(t.path(), &["check", "orth", &a, &b, "--format", "jsonl"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report()["verdicts"]["orthogonal"], false);
}

#[test]
fn check_leq_reports_algebraic_residual() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0]);
    let b = diag(t.path(), "b.json", &[2.0, 0.0]);
    let r = orthoalg(t.path(), &["check", "leq", &a, &b, "--format", "jsonl"]);
    assert_eq!(r.code, 1);
    let rep = r.report();
    assert_eq!(rep["verdicts"]["algebraic"], false);
    assert!((rep["residuals"]["algebraic"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let text = orthoalg(t.path(), &["check", "leq", &a, &b]);
    assert!(text.stdout.contains("A² ≠ BA"), "{}", text.stdout);
}

#[test]
fn check_leq_holds_with_witness() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0, 0.0]);
    let b = diag(t.path(), "b.json", &[1.0, 3.0, 0.0]);
    let r = orthoalg(t.path(), &["check", "leq", &a, &b, "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report();
    assert_eq!(rep["verdicts"]["witness_orthogonal"], true);
    assert!(rep["residuals"]["witness_sum"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn bad_inputs_exit_2() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0]);
    fs::write(t.path().join("bad.json"), "{\"dim\": 2, \"entries\": [[").unwrap();
    fs::write(t.path().join("shape.json"), r#"{"dim": 2, "entries": [[[1,0],[0,0]]]}"#).unwrap();
    fs::write(
        t.path().join("skew.json"),
        r#"{"dim": 2, "entries": [[[0,0],[1,0]],[[-1,0],[0,0]]]}"#,
    )
    .unwrap();
    let three = diag(t.path(), "three.json", &[1.0, 0.0, 0.0]);
    for other in ["bad.json", "shape.json", "skew.json", "missing.json", three.as_str()] {
        let r = orthoalg(t.path(), &["check", "orth", &a, other]);
        assert_eq!(r.code, 2, "{other}: {}", r.stdout);
        assert!(r.stderr.starts_with("error:"), "{other}: {}", r.stderr);
    }
    assert_eq!(orthoalg(t.path(), &["check", "orth", &a]).code, 2);
    assert_eq!(orthoalg(t.path(), &["meet", &a]).code, 2);
    assert_eq!(orthoalg(t.path(), &["frobnicate"]).code, 2);
}

#[test]
fn meet_writes_the_expected_observable() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 1.0, 0.0]);
    let b = diag(t.path(), "b.json", &[1.0, 2.0, 0.0]);
    let r = orthoalg(t.path(), &["meet", &a, &b, "--out", "m.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let m = read_matrix(&t.path().join("m.json"));
    assert_eq!(m, linalg::real_diag(&[1.0, 0.0, 0.0]));
}

#[test]
fn join_without_upper_bound_names_the_atoms() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 1.0, 0.0]);
    let b = diag(t.path(), "b.json", &[1.0, 2.0, 0.0]);
    let r = orthoalg(t.path(), &["join", &a, &b, "--out", "j.json"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("atoms (1, 2)"), "{}", r.stdout);
    assert!(!t.path().join("j.json").exists());
    let r = orthoalg(t.path(), &["join", &a, &b, "--format", "jsonl"]);
    assert_eq!(r.report()["details"]["violating_pair"], json!([1.0, 2.0]));
}

#[test]
fn join_of_orthogonal_pair_is_the_sum() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0, 0.0]);
    let b = diag(t.path(), "b.json", &[0.0, -2.0, 0.0]);
    let r = orthoalg(t.path(), &["join", &a, &b, "--out", "j.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(read_matrix(&t.path().join("j.json")), linalg::real_diag(&[1.0, -2.0, 0.0]));
}

/// Three commuting observables in a random basis with enough shared values
/// that meets and joins are nontrivial.
fn rotated_family(dir: &Path, seed: u64) -> [String; 3] {
    let mut rng = trial_rng(seed, 0);
    let u = random_unitary(&mut rng, 6);
    let rot = |v: &[f64]| &u * linalg::real_diag(v) * u.adjoint();
    write_matrix(dir, "x.json", &rot(&[1.0, 1.0, 2.0, 0.0, -1.0, 0.0]));
    write_matrix(dir, "y.json", &rot(&[1.0, 0.0, 2.0, 3.0, -1.0, 0.0]));
    write_matrix(dir, "z.json", &rot(&[1.0, 1.0, 2.0, 3.0, 0.0, 0.0]));
    ["x.json".into(), "y.json".into(), "z.json".into()]
}

#[test]
fn meet_fold_matches_pairwise_files() {
    let t = TempDir::new().unwrap();
    let [x, y, z] = rotated_family(t.path(), 11);
    let r = orthoalg(t.path(), &["meet", &x, &y, &z, "--out", "all.json", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report()["verdicts"]["family_agrees"], true);
    assert_eq!(orthoalg(t.path(), &["meet", &x, &y, "--out", "xy.json"]).code, 0);
    assert_eq!(orthoalg(t.path(), &["meet", "xy.json", &z, "--out", "xyz.json"]).code, 0);
    let all = fs::read(t.path().join("all.json")).unwrap();
    assert_eq!(all, fs::read(t.path().join("xyz.json")).unwrap());
    let atoms: Vec<(f64, u64)> = r
        .records("atom")
        .iter()
        .map(|a| (a["value"].as_f64().unwrap(), a["rank"].as_u64().unwrap()))
        .collect();
    assert_eq!(atoms.len(), 3);
    assert_eq!(atoms.iter().map(|a| a.1).collect::<Vec<_>>(), vec![4, 1, 1]);
    assert!((atoms[1].0 - 1.0).abs() < 1e-12 && (atoms[2].0 - 2.0).abs() < 1e-12);
}

#[test]
fn join_fold_matches_pairwise_files() {
    let t = TempDir::new().unwrap();
    let [x, y, z] = rotated_family(t.path(), 12);
    let r = orthoalg(t.path(), &["join", &x, &y, &z, "--out", "all.json", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(orthoalg(t.path(), &["join", &x, &y, "--out", "xy.json"]).code, 0);
    assert_eq!(orthoalg(t.path(), &["join", "xy.json", &z, "--out", "xyz.json"]).code, 0);
    assert_eq!(
        fs::read(t.path().join("all.json")).unwrap(),
        fs::read(t.path().join("xyz.json")).unwrap()
    );
    let j = read_matrix(&t.path().join("all.json"));
    let mut rng = trial_rng(12, 0);
    let u = random_unitary(&mut rng, 6);
    let expect = &u * linalg::real_diag(&[1.0, 1.0, 2.0, 3.0, -1.0, 0.0]) * u.adjoint();
    assert!(linalg::op_norm(&(j - expect)) < 1e-12);
}

#[test]
fn written_observable_round_trips() {
    let t = TempDir::new().unwrap();
    let [x, y, _] = rotated_family(t.path(), 13);
    let r = orthoalg(t.path(), &["join", &x, &y, "--out", "j.json", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = orthoalg(t.path(), &["spectrum", "j.json", "--format", "jsonl"]);
    assert_eq!(s.code, 0, "{}", s.stderr);
    let before = r.records("atom");
    let after = s.records("atom");
    assert_eq!(before.len(), after.len());
    for (p, q) in before.iter().zip(&after) {
        assert_eq!(p["rank"], q["rank"]);
        let (pv, qv) = (p["value"].as_f64().unwrap(), q["value"].as_f64().unwrap());
        assert!((pv - qv).abs() <= 1e-8 * pv.abs().max(1.0), "{pv} vs {qv}");
    }
}

#[test]
fn spectrum_selects_a_borel_set() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[-1.0, 2.0, 2.0, 0.5]);
    let r = orthoalg(t.path(), &["spectrum", &a, "--delta", "(-inf,0) | {2}", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let sel = &r.report()["details"]["selection"];
    assert_eq!(sel["rank"], 3);
    assert_eq!(sel["atoms"], json!([-1.0, 2.0]));
    assert_eq!(orthoalg(t.path(), &["spectrum", &a, "--delta", "[2,1]"]).code, 2);
}

#[test]
fn sweep_reports_are_deterministic() {
    let t = TempDir::new().unwrap();
    for args in [
        vec!["sweep", "--mode", "oracle", "--trials", "40", "--dim", "5", "--seed", "3"],
        vec!["sweep", "--mode", "axioms", "--trials", "30", "--dim", "4", "--seed", "9", "--clustered"],
        vec!["sweep", "--mode", "order", "--trials", "30", "--dim", "4", "--seed", "9"],
    ] {
        let mut args = args.clone();
        args.extend(["--format", "jsonl"]);
        let first = orthoalg(t.path(), &args);
        let second = orthoalg(t.path(), &args);
        assert_eq!(first.code, 0, "{:?}: {}", args, first.stdout);
        assert_eq!(strip_wall_time(&first.stdout), strip_wall_time(&second.stdout));
        assert_eq!(first.report()["seed"], json!(args[args.iter().position(|a| *a == "--seed").unwrap() + 1].parse::<u64>().unwrap()));
    }
    assert!(!t.path().join("counterexamples").exists());
}

#[test]
fn check_reports_are_deterministic() {
    let t = TempDir::new().unwrap();
    let [x, y, _] = rotated_family(t.path(), 14);
    let args = ["check", "leq", x.as_str(), y.as_str(), "--format", "jsonl"];
    let first = orthoalg(t.path(), &args);
    let second = orthoalg(t.path(), &args);
    assert_eq!(strip_wall_time(&first.stdout), strip_wall_time(&second.stdout));
    assert_eq!(first.report()["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_sweep_succeeds() {
    let t = TempDir::new().unwrap();
    let r = orthoalg(t.path(), &["sweep", "--trials", "0", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let checks = r.records("check");
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c["instances"] == 0));
    assert_eq!(orthoalg(t.path(), &["sweep", "--mode", "oracle", "--trials", "0"]).code, 0);
}

#[test]
fn sweep_usage_errors() {
    let t = TempDir::new().unwrap();
    assert_eq!(orthoalg(t.path(), &["sweep", "--mode", "nope"]).code, 2);
    assert_eq!(orthoalg(t.path(), &["sweep", "--dim", "0"]).code, 2);
    assert_eq!(orthoalg(t.path(), &["sweep", "--mode", "oracle", "--clustered", "--trials", "1"]).code, 2);
}

#[test]
fn demo_two_level_meet_is_zero() {
    let t = TempDir::new().unwrap();
    let r = orthoalg(t.path(), &["demo", "--n", "2", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report();
    assert_eq!(rep["verdicts"]["meet_is_zero"], true);
    assert_eq!(rep["residuals"]["meet_norm"], 0.0);
    assert_eq!(r.records("atom_pair").len(), 2);
}

#[test]
fn demo_rejects_tiny_truncation() {
    let t = TempDir::new().unwrap();
    let r = orthoalg(t.path(), &["demo", "--n", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("n must be at least 2"));
    assert_eq!(orthoalg(t.path(), &["demo", "--hbar", "-1"]).code, 2);
}

#[test]
fn tolerance_profile_and_flags() {
    let t = TempDir::new().unwrap();
    let a = diag(t.path(), "a.json", &[1.0, 0.0]);
    let r = orthoalg_env(t.path(), &["spectrum", &a, "--format", "jsonl"], &[("ORTHOALG_TOL_PROFILE", "strict")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report()["tolerances"]["proj_tol"], 1e-10);
    let r = orthoalg_env(
        t.path(),
        &["spectrum", &a, "--format", "jsonl", "--tol-proj", "1e-7"],
        &[("ORTHOALG_TOL_PROFILE", "strict")],
    );
    assert_eq!(r.report()["tolerances"]["proj_tol"], 1e-7);
    assert_eq!(r.report()["tolerances"]["cluster_rel"], 1e-10);
    let bogus = orthoalg_env(t.path(), &["spectrum", &a], &[("ORTHOALG_TOL_PROFILE", "bogus")]);
    assert_eq!(bogus.code, 2);
    assert_eq!(orthoalg(t.path(), &["spectrum", &a, "--tol-zero", "2"]).code, 2);
}

#[test]
fn file_tolerances_apply() {
    let t = TempDir::new().unwrap();
    // eigenvalues 1 and 1 + 1e-7 merge only under a looser cluster threshold
    let body = json!({
        "dim": 2,
        "entries": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0 + 1e-7, 0.0]]],
        "tolerances": { "cluster_rel": 1e-6 },
    });
    fs::write(t.path().join("a.json"), body.to_string()).unwrap();
    let r = orthoalg(t.path(), &["spectrum", "a.json", "--format", "jsonl"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.records("atom").len(), 1);
    let r = orthoalg(t.path(), &["spectrum", "a.json", "--format", "jsonl", "--tol-cluster", "1e-9"]);
    assert_eq!(r.records("atom").len(), 2);
}
