use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcontext"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QCONTEXT_OUT")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bell_reports_four_for_cats() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bell", "--in", fixture("cats_bell.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("CHSH=4.000000"));
    let report = read_json(&dir.path().join("bell_report.json"));
    assert_eq!(report["chsh"].as_f64(), Some(4.0));
    assert_eq!(report["violated"], true);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "bell");
    assert_eq!(manifest["input_digest"].as_str().unwrap().len(), 16);
}

#[test]
fn bell_without_violation_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bell", "--in", fixture("uniform_bell.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("bell_report.json"))["chsh"].as_f64(), Some(0.0));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    for sub in ["bell", "poll", "classify", "kernel-validate"] {
        let o = run(&[sub, "--in", bad.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(2), "{sub}");
        assert!(!o.stderr.is_empty());
    }
    let o = run(&["bell", "--in", "/nonexistent/file.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unnormalized_bell_table_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("uniform_bell.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["joints"][0]["p_uu"] = serde_json::json!(0.9);
    let path = dir.path().join("broken.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = run(&["bell", "--in", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn multi_cycle_liar_exits_two_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.txt");
    std::fs::write(&path, "1: sentence 2 is true\n2: sentence 1 is false\n3: sentence 3 is true\n").unwrap();
    let o = run(&["liar", "--in", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycles"));
}

#[test]
fn bad_hypothesis_and_grid_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("liar5.txt");
    let cfg = cfg.to_str().unwrap();
    for extra in [["--hypothesis", "9:true"], ["--hypothesis", "one"], ["--grid", "0:1"], ["--grid", "1:0:0.1"]] {
        let o = run(&["liar", "--in", cfg, extra[0], extra[1]], dir.path());
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn liar_writes_trace_and_contradictions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["liar", "--in", fixture("liar5.txt").to_str().unwrap(), "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&dir.path().join("liar_meta.json"));
    let times: Vec<f64> = meta["contradiction_times"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(times.iter().any(|t| (t - 2.5 * std::f64::consts::PI).abs() < 1e-9), "{times:?}");
    assert_eq!(meta["step_cycle_type"], serde_json::json!([10]));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 201 * 10);
    let svg = std::fs::read_to_string(dir.path().join("trace.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 10);
}

#[test]
fn truth_teller_has_no_contradictions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["liar", "--in", fixture("truth_teller.txt").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let meta = read_json(&dir.path().join("liar_meta.json"));
    assert_eq!(meta["contradiction_times"], serde_json::json!([]));
}

#[test]
fn classic_liar_trace_is_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["liar", "--in", fixture("liar_classic.txt").to_str().unwrap(), "--grid", "0:4pi:pi/8"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let rows: Vec<(f64, String, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect();
    let claims: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.1.as_str()).collect();
    assert_eq!(claims.len(), 2);
    // period π: the sample at t and t + π agree
    let f: Vec<f64> = rows.iter().filter(|r| r.1 == "1:F").map(|r| r.2).collect();
    for k in 0..f.len() - 8 {
        assert!((f[k] - f[k + 8]).abs() < 1e-12);
    }
}

#[test]
fn poll_outputs_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("poll_default.json");
    let o = run(&["poll", "--in", cfg.to_str().unwrap(), "--seed", "3", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["poll_report.json", "census.csv", "classification.json", "poll.svg", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(read_json(&dir.path().join("poll_report.json"))["seed"], 3);
    assert_eq!(read_json(&dir.path().join("classification.json"))["verdict"], "neither");
    assert_eq!(read_json(&dir.path().join("manifest.json"))["seed"], 3);
    let census = std::fs::read_to_string(dir.path().join("census.csv")).unwrap();
    assert_eq!(census.lines().count(), 28);
}

#[test]
fn poll_epsilon_limits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("poll_default.json");
    let o = run(&["poll", "--in", cfg.to_str().unwrap(), "--epsilon", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("poll_report.json"));
    for k in 0..3 {
        assert!(r["predetermined_total"][k].as_f64().unwrap() < 1e-3);
    }
    let o = run(&["poll", "--in", cfg.to_str().unwrap(), "--epsilon", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("poll_report.json"));
    for k in 0..3 {
        assert!(r["formed"][k].as_f64().unwrap() < 1e-3);
    }
    let o = run(&["poll", "--in", cfg.to_str().unwrap(), "--epsilon", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reads_transition_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    let data = qcontext::structure::TransitionData::from_pairwise(1.0, 0.5, 1.0);
    std::fs::write(&path, serde_json::to_string(&data).unwrap()).unwrap();
    let o = run(&["classify", "--in", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let c = read_json(&dir.path().join("classification.json"));
    assert_eq!(c["verdict"], "neither");
    assert_eq!(c["kolmogorov"]["certificate"]["kind"], "farkas");
}

#[test]
fn kernel_validate_reports_bad_rows_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel-validate", "--in", fixture("diamond_kernel.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("kernel_report.json"))["valid"], true);

    let path = dir.path().join("k.json");
    std::fs::write(&path, r#"{"states":["a","b"],"contexts":["c"],"prob":[[[0.5,0.4],[0,1]]]}"#).unwrap();
    let o = run(&["kernel-validate", "--in", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("kernel_report.json"));
    assert_eq!(r["valid"], false);
    assert_eq!(r["violations"].as_array().unwrap().len(), 1);

    std::fs::write(&path, r#"{"states":["a","b"],"contexts":["c"],"prob":[[[1,0]]]}"#).unwrap();
    let o = run(&["kernel-validate", "--in", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qcontext"))
        .args(["bell", "--in", fixture("cats_bell.json").to_str().unwrap()])
        .env("QCONTEXT_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("bell_report.json").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let poll = fixture("poll_default.json");
    let liar = fixture("liar5.txt");
    for d in [a.path(), b.path()] {
        assert!(run(&["poll", "--in", poll.to_str().unwrap(), "--svg"], d).status.success());
        assert!(run(&["liar", "--in", liar.to_str().unwrap(), "--svg"], d).status.success());
    }
    for f in ["poll_report.json", "census.csv", "classification.json", "poll.svg", "trace.csv", "liar_meta.json", "trace.svg"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
