use std::path::Path;
use std::process::{Command, Output};

fn fbsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbsplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn list_gallery() {
    let out = fbsplit(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in fbsplit::gallery::GALLERY_NAMES {
        assert!(text.contains(name), "{name} missing");
    }
    let one = String::from_utf8(fbsplit(&["list", "lasso"]).stdout).unwrap();
    assert_eq!(one.lines().filter(|l| l.starts_with("lasso")).count(), 1);
    assert!(!one.contains("box-quadratic"));
    let none = fbsplit(&["list", "no-such-problem"]);
    assert!(none.status.success());
    assert_eq!(String::from_utf8(none.stdout).unwrap().lines().count(), 1);
}

#[test]
fn solve_lasso_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let js = dir.path().join("s.json");
    let out = fbsplit(&[
        "solve", "--problem", "lasso", "--scheme", "fbn", "--h", "1", "--tol", "1e-10", "--csv", path(&csv), "--json",
        path(&js),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,residual,step_norm_sq,b_error,a_k,gamma_z,g_z,k_z");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 8);
    assert_eq!(first[2], "", "no step before the first sample");
    let last_residual: f64 = text.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let summary = json(&js);
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["final_residual"].as_f64().unwrap(), last_residual);
    assert_eq!(summary["limit"].as_array().unwrap().len(), 10);
    assert!(summary["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = fbsplit(&["solve", "--problem", "rotation-residual", "--scheme", "fb-relaxed", "--h", "0.7", "--seed", "3", "--csv", path(&csv)]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(csv).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn inadmissible_relaxation_exits_with_one() {
    let out = fbsplit(&["solve", "--problem", "lasso", "--scheme", "fbn", "--h", "2.0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("δ=1.5"), "{err}");
}

#[test]
fn override_runs_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let js = dir.path().join("s.json");
    let out = fbsplit(&[
        "solve", "--problem", "box-quadratic", "--h", "1.6", "--override-admissibility", "--max-iters", "50", "--json",
        path(&js),
    ]);
    assert_ne!(out.status.code(), Some(1));
    assert_eq!(json(&js)["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn not_converged_exits_with_two() {
    let out = fbsplit(&["solve", "--problem", "lasso", "--max-iters", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn semigroup_flow_on_box() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = fbsplit(&[
        "solve", "--problem", "box-quadratic", "--scheme", "semigroup-flow", "--horizon", "50", "--record-every", "100",
        "--csv", path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let b_error: f64 = text.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(b_error <= 1e-6);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let js = dir.path().join("s.json");
    std::fs::write(
        &cfg,
        "# inline box-quadratic\nphi = box:0,0|1,1\noperator = quadratic:1,0,0,1|2,-1\nscheme = fb-classical\nh = 3.0\n",
    )
    .unwrap();
    // h = 3 violates h < 2 beta; the flag fixes it
    let bad = fbsplit(&["solve", "--config", path(&cfg)]);
    assert_eq!(bad.status.code(), Some(1));
    let ok = fbsplit(&["solve", "--config", path(&cfg), "--h", "1.5", "--json", path(&js)]);
    assert_eq!(ok.status.code(), Some(0));
    let limit = json(&js)["limit"].clone();
    assert!((limit[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(limit[1].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn compare_splitters_on_lasso() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbsplit(&[
        "compare", "--problem", "lasso", "--schemes", "fbn,fb-classical,fb-relaxed", "--h", "0.8", "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("compare.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    assert!(report["b_agreement"].as_f64().unwrap() <= 1e-7);
    for s in ["fbn", "fb-classical", "fb-relaxed"] {
        assert!(dir.path().join(format!("{s}.csv")).exists());
    }
}

#[test]
fn compare_h_one_matches_classical() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbsplit(&["compare", "--problem", "halfspace-nonunique", "--schemes", "fbn,fb-classical", "--h", "1", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&dir.path().join("compare.json"))["rows"].clone();
    assert_eq!(rows[0]["iterations"], rows[1]["iterations"]);
    assert_eq!(
        std::fs::read(dir.path().join("fbn.csv")).unwrap(),
        std::fs::read(dir.path().join("fb-classical.csv")).unwrap()
    );
}

#[test]
fn compare_skips_inadmissible_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbsplit(&["compare", "--problem", "box-quadratic", "--schemes", "fbn,fb-relaxed", "--h", "1.2", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("compare.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 1);
    assert_eq!(report["skipped"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("h <= 1"));
}

#[test]
fn compare_single_scheme_and_flows() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbsplit(&["compare", "--problem", "potential-largestep", "--schemes", "newton-flow", "--horizon", "20", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("compare.json"))["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(fbsplit(&["solve"]).status.code(), Some(1));
    assert_eq!(fbsplit(&["solve", "--problem", "nope"]).status.code(), Some(1));
    assert_eq!(fbsplit(&["solve", "--problem", "lasso", "--scheme", "magic"]).status.code(), Some(1));
    assert_eq!(fbsplit(&["compare", "--problem", "lasso"]).status.code(), Some(1));
}
