use std::path::Path;
use std::process::{Command, Output};

fn sagin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagin")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn bench_into(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["bench", "--out", out];
    args.extend_from_slice(extra);
    sagin(&args)
}

#[test]
fn lists_bundled_topologies() {
    let out = sagin(&["topologies"]);
    assert_eq!(code(&out), 0);
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().next(), Some("Nsfnet"));
    assert!(names.lines().any(|l| l == "Tinet"));
}

#[test]
fn place_gateway_json() {
    let out = sagin(&["place", "gateway", "--topo", "Nsfnet", "--alpha", "0.1", "--case", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["nodes"], 13);
    assert_eq!(doc["target"], "gateway");
    let gws = doc["gateways"].as_array().unwrap();
    assert!(!gws.is_empty());
    assert_eq!(doc["gateway_assignment"].as_array().unwrap().len(), 13);
    assert!(doc["gateway_stage"].get("wall_time_ms").is_none());
}

#[test]
fn place_joint_csv_is_stable() {
    let args = ["place", "joint", "--topo", "Ans", "--mode", "reliability", "--case", "3", "--format", "csv", "--seed", "5"];
    let a = sagin(&args);
    let b = sagin(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("node,name,gateway,controller,assigned_gateway,assigned_controller"));
    assert_eq!(text.lines().count(), 1 + 18);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&sagin(&["place", "gateway", "--topo", "Atlantis"])), 2);
    assert_eq!(code(&sagin(&["place", "gateway", "--topo", "Nsfnet", "--mode", "overhead"])), 2);
    assert_eq!(code(&sagin(&["place", "gateway", "--topo", "Nsfnet", "--alpha", "-1"])), 2);
    assert_eq!(code(&sagin(&["place", "gateway", "--topo", "Nsfnet", "--case", "7"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let big = bench_into(dir.path(), &["--exp", "A", "--topo", "Tinet", "--trials", "1", "--exact", "always"]);
    assert_eq!(code(&big), 3);
    assert_eq!(code(&bench_into(dir.path(), &["--exp", "A", "--topo", "Nsfnet", "--trials", "0"])), 2);
    assert_eq!(code(&bench_into(dir.path(), &["--exp", "A", "--topo", "Nsfnet", "--trials", "1", "--jobs", "0"])), 2);
    let fig = bench_into(dir.path(), &["--exp", "A", "--topo", "Nsfnet", "--trials", "1", "--figure", "gw_tradeoff"]);
    assert_eq!(code(&fig), 2);
    assert!(String::from_utf8_lossy(&fig.stderr).contains("needs a sweep over alpha"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(code(&bench_into(&blocker.join("sub"), &["--exp", "A", "--topo", "Nsfnet", "--trials", "1"])), 1);
}

#[test]
fn bench_csv_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--exp", "C", "--topo", "Nsfnet,Ans", "--trials", "3", "--alpha", "0.1", "--sweep", "beta=0.5,2"];
    assert_eq!(code(&bench_into(a.path(), &args)), 0);
    assert_eq!(code(&bench_into(b.path(), &args)), 0);
    let mut files: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files.len(), 2);
    for f in files {
        let x = std::fs::read(a.path().join(&f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(&f)).unwrap(), "{f:?}");
        let text = String::from_utf8(x).unwrap();
        assert_eq!(
            text.lines().next(),
            Some("topology,trial,method,objective,avg_latency_ms,avg_reliability,facilities,time_ms,approx_ratio")
        );
    }
}

#[test]
fn bench_verify_figures_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench_into(
        dir.path(),
        &[
            "--exp", "B", "--topo", "Nsfnet", "--trials", "4", "--sweep", "case=1,2,3,4", "--figure", "rel_cases",
            "--verify", "--dump-tables", "--format", "json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rows consistent"));
    assert!(dir.path().join("exp_b.json").is_file());
    let fig = std::fs::read_to_string(dir.path().join("fig_rel_cases.csv")).unwrap();
    assert!(fig.starts_with("series,label,case,avg_reliability"));
    assert!(dir.path().join("tables/Nsfnet/r_sat.csv").is_file());
}
