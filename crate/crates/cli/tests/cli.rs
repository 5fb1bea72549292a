use std::path::Path;
use std::process::{Command, Output};

fn hc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercyc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_prints_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["solve", "--m0", "2", "--lambda0", "2", "--p", "z", "--out", "s.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("f = z^3/48"), "{s}");
    assert!(s.contains("residual = 0"), "{s}");
    assert_eq!(json(&d.path().join("s.json"))["residual"], "0");
}

#[test]
fn squares_exhaust_the_budget() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["dichotomy", "--seq", "n^2", "--rho", "1.5", "--out", "d.json"], d.path());
    assert_eq!(o.status.code(), Some(3));
    let v = json(&d.path().join("d.json"));
    assert_eq!(v["report"]["feasibility"], "infeasible");
    let sup = v["report"]["supremum"].as_f64().unwrap();
    assert!(sup < v["report"]["required_coverage"].as_f64().unwrap());
}

#[test]
fn harmonic_base_is_feasible() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hc(&["dichotomy", "--seq", "n", "--rho", "1.5"], d.path()).status.code(), Some(0));
}

#[test]
fn weyl_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["weyl", "--theta", "sqrt(5)-2", "--seq", "n", "--N", "100000", "--out", "w.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&d.path().join("w.json"))["pass"], true);
}

#[test]
fn stage_is_deterministic_and_reverifiable() {
    let d = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["stage", "--rho", "1.02", "--p", "1+z", "--grid", "200", "--random", "500", "--seed", "7", "--out", out]
    };
    let mut a = args("a.json");
    a.extend(["--f-out", "f.json"]);
    assert_eq!(hc(&a, d.path()).status.code(), Some(0));
    assert_eq!(hc(&args("b.json"), d.path()).status.code(), Some(0));
    let ra = std::fs::read(d.path().join("a.json")).unwrap();
    let rb = std::fs::read(d.path().join("b.json")).unwrap();
    assert_eq!(ra, rb);
    let v = json(&d.path().join("a.json"));
    assert_eq!(v["certificate"]["mode"], "optimized");
    assert!(v["certificate"]["plan"]["partition"]["points"].is_array());

    let o = hc(&["verify", "--cert", "a.json", "--f", "f.json", "--grid", "50"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = hc(&["sweep", "--cert", "a.json", "--f", "f.json", "--grid", "20", "--csv", "s.csv"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,cell,order,certified_bound,grid_error,margin"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_hypercyc"))
            .args(["stage", "--rho", "1.01", "--grid", "100", "--out", out])
            .env("HC_THREADS", threads)
            .current_dir(d.path())
            .status()
            .unwrap()
    };
    assert!(run("1", "one.json").success());
    assert!(run("3", "three.json").success());
    assert_eq!(
        std::fs::read(d.path().join("one.json")).unwrap(),
        std::fs::read(d.path().join("three.json")).unwrap()
    );
}

#[test]
fn faithful_refusal_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["stage", "--rho", "2", "--mode", "faithful", "--out", "b.json"], d.path());
    assert_eq!(o.status.code(), Some(3));
    let v = json(&d.path().join("b.json"));
    assert_eq!(v["status"], "budget_exceeded");
    assert!(v["budget"]["extrapolation"]["log10_n0"].as_f64().unwrap() > 10.0);
}

#[test]
fn usage_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hc(&["stage", "--rho", "abc"], d.path()).status.code(), Some(2));
    assert_eq!(hc(&["nonsense"], d.path()).status.code(), Some(2));
    assert_eq!(hc(&["weyl", "--theta", "sqrt(x)"], d.path()).status.code(), Some(2));
    assert_eq!(hc(&["pipeline", "--schedule", "1:1.01"], d.path()).status.code(), Some(2));
}

#[test]
fn rotation_finds_a_witness() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["rotate", "--rho", "1.02", "--p", "z", "--ladder", "64", "--out", "r.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&d.path().join("r.json"));
    assert!(v["witness"]["recomputed_error"].as_f64().unwrap() < 0.3);
}

#[test]
fn two_stage_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let o = hc(&["pipeline", "--rho", "1.005", "--targets", "1,49", "--grid", "50", "--out", "p.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&d.path().join("p.json"));
    assert_eq!(v["certificates"].as_array().unwrap().len(), 2);
    assert!(v["reverify"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}
