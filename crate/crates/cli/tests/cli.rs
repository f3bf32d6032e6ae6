use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbmsketch"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn generate(dir: &Path, alpha: &str, beta: &str, n: &str) -> (String, String) {
    let graph = dir.join("g.txt");
    let planted = dir.join("planted.txt");
    run_ok(bin().args(["generate", "--alpha", alpha, "--beta", beta, "--n", n, "--seed", "3", "--out"])
        .arg(&graph)
        .arg("--planted")
        .arg(&planted));
    (graph.to_str().unwrap().into(), planted.to_str().unwrap().into())
}

fn same_up_to_flip(a: &str, b: &str) -> bool {
    let parse = |s: &str| -> Vec<(String, String)> {
        s.lines().map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        }).collect()
    };
    let (pa, pb) = (parse(a), parse(b));
    let flip = |s: &str| if s == "1" { "-1".to_string() } else { "1".to_string() };
    pa == pb || pa.iter().map(|(v, s)| (v.clone(), flip(s))).collect::<Vec<_>>() == pb
}

#[test]
fn solve_then_certify() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, planted) = generate(dir.path(), "40", "1", "120");
    let out = dir.path().join("cut.txt");
    let diag = json(&run_ok(bin().args(["solve", &graph, "--mu", "auto", "--seed", "1", "--out"]).arg(&out)));
    assert!(diag["rank_one_gap"].as_f64().unwrap() <= 1e-6);
    assert!(diag["converged"].as_bool().unwrap());
    let cut = std::fs::read_to_string(&out).unwrap();
    assert!(same_up_to_flip(&cut, &std::fs::read_to_string(&planted).unwrap()));

    let report = json(&run_ok(bin().args(["certify", &graph]).arg(&out)));
    assert_eq!(report["verdict"], "CERTIFIED");
    assert!(report["lambda2_lower"].as_f64().unwrap() > 0.0);
    assert!(report["zg_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn sketch_with_auto_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, planted) = generate(dir.path(), "50", "1", "300");
    let out = dir.path().join("cut.txt");
    let res = json(&run_ok(
        bin().args(["sketch", &graph, "--gamma", "auto", "--alpha", "50", "--beta", "1", "--seed", "5", "--out"]).arg(&out),
    ));
    assert!((res["gamma"].as_f64().unwrap() - 0.1085250072865155).abs() < 1e-15);
    assert_eq!(res["verdict"], "CERTIFIED");
    assert!(same_up_to_flip(
        &std::fs::read_to_string(&out).unwrap(),
        &std::fs::read_to_string(&planted).unwrap()
    ));

    let failed = bin().args(["sketch", &graph, "--gamma", "auto", "--out"]).arg(&out).output().unwrap();
    assert!(!failed.status.success());
}

#[test]
fn thresholds_json_and_curve() {
    let r = json(&run_ok(bin().args(["thresholds", "--alpha", "50", "--beta", "1"])));
    assert_eq!(r["prop1_phase"], "RECOVERABLE");
    assert!((r["lemma2_gamma"]["value"].as_f64().unwrap() - 808.0 / 7203.0).abs() < 1e-15);
    assert!((r["conjecture_gamma"]["value"].as_f64().unwrap() - 0.054262503643257768).abs() < 1e-15);
    assert_eq!(r["theorem6_gamma"]["vacuous"], false);

    let weak = json(&run_ok(bin().args(["thresholds", "--alpha", "3", "--beta", "1"])));
    assert_eq!(weak["lemma2_gamma"]["vacuous"], true);
    assert_eq!(weak["lemma2_gamma"]["display"].as_f64().unwrap(), 1.0);

    let csv = run_ok(bin().args(["thresholds", "--curve", "prop1", "--beta-min", "0", "--beta-max", "10", "--points", "6"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,alpha");
    assert_eq!(lines.len(), 7);
    assert!(lines.contains(&"2,8"));
}

#[test]
fn experiment_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "alphas = 10:10:20\nbetas = 1, 20\nn = 60\nreps = 2\nmethods = full_sdp\nseed = 9\n").unwrap();
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    run_ok(bin().args(["experiment", "--grid"]).arg(&grid).arg("--out-csv").arg(&csv).arg("--out-svg").arg(&svg)
        .args(["--overlay", "prop1_curve", "--jobs", "2"]));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("alpha,beta,rep,method,n,gamma,mu,recovered,fell_back,unassigned,runtime_ms,seed\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(text.contains("SKIPPED"));
    let picture = std::fs::read_to_string(&svg).unwrap();
    assert!(picture.starts_with("<svg"));
    assert!(picture.contains("polyline"));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("bad.txt");
    std::fs::write(&graph, "n 3\n0 5\n").unwrap();
    let out = bin().arg("solve").arg(&graph).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
