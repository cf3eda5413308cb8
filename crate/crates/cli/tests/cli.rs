use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_darboux-lab"));
    cmd.current_dir(root()).args(args).env_remove("DARBOUX_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&a)).unwrap()
}

/// Compares JSON output with `tests/fixtures/<name>.json`. Set
/// `UPDATE_FIXTURES=1` to rewrite the fixture.
fn golden(name: &str, args: &[&str]) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let got = stdout(&a);
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"));
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(got, want, "report for {args:?} differs from {}", path.display());
}

fn strings(v: &serde_json::Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn darboux_reference_system() {
    golden(
        "darboux_samardzija_greller",
        &["darboux", "corpus/samardzija_greller.vf", "--degree", "4"],
    );
    let r = json(&["darboux", "corpus/samardzija_greller.vf", "--degree", "4"]);
    let polys: Vec<&str> = r["darboux"]["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["poly"].as_str().unwrap())
        .collect();
    assert_eq!(polys, ["x", "y", "z"]);
}

#[test]
fn darboux_restricted_plane() {
    golden(
        "darboux_restricted_y0_a0",
        &["darboux", "corpus/restricted_y0_a0.vf", "--degree", "2"],
    );
    let text = stdout(&["darboux", "corpus/restricted_y0_a0.vf", "--degree", "2"]);
    assert!(text.contains("  x + 1/2   cofactor 2*x\n"));
}

#[test]
fn exponential_factor_regimes() {
    golden(
        "expfactors_samardzija_greller",
        &["expfactors", "corpus/samardzija_greller.vf"],
    );
    golden("expfactors_lv3_c0", &["expfactors", "corpus/lv3_c0.vf"]);
    golden("expfactors_lv3_ab0", &["expfactors", "corpus/lv3_ab0.vf"]);
    golden("expfactors_lv3_a0", &["expfactors", "corpus/lv3_a0.vf"]);
    golden("expfactors_lv3_a0_c0", &["expfactors", "corpus/lv3_a0_c0.vf"]);
    let r = json(&["expfactors", "corpus/lv3_ab0.vf"]);
    assert!(r["exp_factors"]["factors"].as_array().unwrap().is_empty());
    let r = json(&["expfactors", "corpus/lv3_c0.vf"]);
    let gs: Vec<&str> = r["exp_factors"]["factors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["g"].as_str().unwrap())
        .collect();
    assert_eq!(gs, ["x^2 + 2*x*y + 2*x*z + y^2 + 2*y*z + z^2", "x + z", "y"]);
}

#[test]
fn integrals() {
    golden(
        "integrals_integrable",
        &["integrals", "corpus/integrable.vf", "--degree", "1"],
    );
    golden(
        "integrals_samardzija_greller",
        &["integrals", "corpus/samardzija_greller.vf", "--degree", "4"],
    );
    golden(
        "integrals_restricted_y0_a0",
        &["integrals", "corpus/restricted_y0_a0.vf", "--degree", "2"],
    );
    let r = json(&["integrals", "corpus/integrable.vf", "--degree", "1"]);
    let hs: Vec<&str> = r["integrals"]["functions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["expression"].as_str().unwrap())
        .collect();
    assert_eq!(hs, ["x*y*exp(-(x + y))", "z"]);
    let text = stdout(&["integrals", "corpus/samardzija_greller.vf", "--degree", "4"]);
    assert!(text.contains("no Darboux first integral from certificates\nrational obstruction holds to degree 4\n"));
}

#[test]
fn formal_series() {
    golden(
        "formal_restricted_z0",
        &["formal", "corpus/restricted_z0.vf", "--order", "8", "--margin", "2"],
    );
    golden(
        "formal_lv3_b0",
        &["formal", "corpus/lv3_b0.vf", "--order", "6", "--margin", "2"],
    );
    golden(
        "formal_lv3_a3_promoted",
        &[
            "formal",
            "corpus/lv3_a3.vf",
            "--order",
            "4",
            "--margin",
            "1",
            "--promote",
            "b",
        ],
    );
    let r = json(&[
        "formal",
        "corpus/lv3_a3.vf",
        "--order",
        "4",
        "--margin",
        "1",
        "--promote",
        "b",
    ]);
    assert_eq!(strings(&r["formal"]["basis"]), ["1", "b", "b^2", "b^3", "b^4"]);
    assert_eq!(r["formal"]["only_promoted"], true);
    let r = json(&["formal", "corpus/restricted_z0.vf", "--order", "8"]);
    assert_eq!(r["formal"]["dimension"], 1);
    assert!(r["formal"]["depends_only_on"].is_null());
    let out = run(&["formal", "corpus/lv3_a3.vf", "--promote", "q"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_monitors_integrals_and_writes_csv() {
    let dir = std::env::temp_dir().join(format!("darboux-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("traj.csv");
    let r = json(&[
        "simulate",
        "corpus/integrable.vf",
        "--x0",
        "0.5,0.5,1.0",
        "--t-end",
        "100",
        "--tol",
        "1e-10",
        "--emit",
        csv.to_str().unwrap(),
    ]);
    let drift = r["simulation"]["drift"].as_array().unwrap();
    assert_eq!(drift[0]["integral"], "x*y*exp(-(x + y))");
    assert!(drift[0]["relative_drift"].as_f64().unwrap() <= 1e-6);
    assert_eq!(drift[1]["max_abs_drift"].as_f64().unwrap(), 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x,y,z,H1,H2\n"));
    let rows = text.lines().count() - 1;
    assert_eq!(rows as u64, r["simulation"]["accepted_steps"].as_u64().unwrap() + 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn lyapunov_reports_exponent() {
    let r = json(&[
        "lyapunov",
        "corpus/integrable.vf",
        "--x0",
        "0.5,0.5,1.0",
        "--t-end",
        "200",
        "--renorm-dt",
        "0.5",
    ]);
    let l = r["lyapunov"]["largest_exponent"].as_f64().unwrap();
    assert!(l.abs() < 0.05, "{l}");
    assert_eq!(r["config"]["renorm_dt"], 0.5);
}

#[test]
fn analyze_runs_the_pipeline() {
    let r = json(&[
        "analyze",
        "corpus/integrable.vf",
        "--degree",
        "1",
        "--order",
        "3",
        "--x0",
        "0.5,0.5,1",
        "--t-end",
        "10",
    ]);
    for key in ["field", "darboux", "exp_factors", "integrals", "formal", "simulation"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["config"]["command"], "analyze");
}

#[test]
fn json_is_byte_stable() {
    let args = [
        "integrals",
        "corpus/restricted_y0_a0.vf",
        "--degree",
        "3",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run_env(&args, &[("DARBOUX_LAB_THREADS", "1")]);
    let c = run_env(&args, &[("DARBOUX_LAB_THREADS", "4")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = run(&["darboux", "corpus/does_not_exist.vf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does_not_exist.vf"));
    assert!(out.stdout.is_empty());

    let dir = std::env::temp_dir().join(format!("darboux-lab-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.vf");
    std::fs::write(&bad, "vars: x y\ndx/dt = x*y\n").unwrap();
    let out = run(&["darboux", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("y"));
    std::fs::remove_dir_all(&dir).unwrap();

    let out = run_env(&["darboux", "corpus/integrable.vf"], &[("DARBOUX_LAB_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate", "corpus/integrable.vf", "--x0", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
