use std::path::Path;
use std::process::{Command, Output};

use dnet::error::{EXIT_BOUND_VIOLATION, EXIT_RESOURCE, EXIT_VALIDATION};
use dnet::HarnessError;
use dnet_core::{random_network, Network, NetworkSpec};

fn dnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnet")).args(args).output().unwrap()
}

fn write_net(dir: &Path) -> String {
    let net: Network = random_network(&[4, 4], 13, false).unwrap();
    let p = dir.join("net.json");
    std::fs::write(&p, NetworkSpec::from_network(&net).to_json()).unwrap();
    p.display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn variation_and_sparsify() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_net(dir.path());
    let v = json(&dnet(&["variation", "--net", &net]));
    assert!(v["V"].as_f64().unwrap() > 0.0);
    assert!(v["canonical_v_bar"].as_f64().unwrap() <= v["v_bar"].as_f64().unwrap() * (1.0 + 1e-12));

    let s = json(&dnet(&["sparsify", "--net", &net, "--m", "32", "--seed", "3"]));
    let again = json(&dnet(&["sparsify", "--net", &net, "--m", "32", "--seed", "3"]));
    assert_eq!(s, again);
    assert!(s["empirical_error"].as_f64().unwrap() >= 0.0);
    assert!(s["bound2"].as_f64().unwrap() >= s["refined"].as_f64().unwrap());

    let budget = json(&dnet(&["sparsify", "--net", &net, "--m", "8", "--budget", "1e3"]));
    assert!(budget["bound2"].is_null());
}

#[test]
fn bounds_examples_packing() {
    let out = dnet(&["bounds", "--preset", "default"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("n,theorem2,"));
    assert_eq!(dnet(&["bounds", "--preset", "nope"]).status.code(), Some(EXIT_VALIDATION));

    let out = dnet(&["examples", "projection", "--l", "256"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-2);

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("fam.json");
    std::fs::write(&spec, r#"{"kind": "constant_q", "q": [[1, 0], [0, 1]]}"#).unwrap();
    let out = dnet(&["examples", "custom", "--spec", spec.to_str().unwrap(), "--l", "3,4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);

    let p = json(&dnet(&["packing", "--d", "2", "--A", "1", "--T", "1"]));
    assert_eq!(p["packing"]["lattice_count"], "5");
    assert!(p["checker"].is_null());
}

#[test]
fn sweep_writes_reports_and_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"kind": "theorem1", "network": {{"random": {{"widths": [4, 4, 4], "seed": 2, "count": 2}}}},
                "m_grid": [8, 32], "seeds": {{"count": 30}}, "output": {{"dir": {:?}, "stem": "s"}}}}"#,
            out_dir.display().to_string()
        ),
    )
    .unwrap();
    let out = dnet(&["sweep", "--config", cfg.to_str().unwrap(), "--certify"]);
    let summary = json(&out);
    assert_eq!(summary["all_pass"], true);
    assert!(out_dir.join("s_trials.csv").exists());
    assert!(out_dir.join("s_summary.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"kind": "theorem1", "network": {"random": {"widths": [4], "seed": 1}}, "m_grid": []}"#).unwrap();
    let out = dnet(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m_grid"));

    assert_eq!(dnet(&["sweep", "--config", "/nonexistent.json"]).status.code(), Some(EXIT_VALIDATION));

    let sel = dir.path().join("sel.json");
    std::fs::write(
        &sel,
        r#"{"kind": "select", "network": {"random": {"widths": [4, 4], "seed": 1}},
            "select": {"m": 6, "n": 10, "noise_sd": 0.1, "truth_index": 0, "cover_guard": 50}}"#,
    )
    .unwrap();
    assert_eq!(dnet(&["select", "--config", sel.to_str().unwrap()]).status.code(), Some(EXIT_RESOURCE));

    assert_eq!(HarnessError::BoundViolation("x".into()).exit_code(), EXIT_BOUND_VIOLATION);
}

#[test]
fn select_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sel = dir.path().join("sel.json");
    std::fs::write(
        &sel,
        r#"{"kind": "select", "network": {"random": {"widths": [4, 4], "seed": 13}},
            "select": {"m": 2, "n": 200, "noise_sd": 0.0, "truth_index": 3}}"#,
    )
    .unwrap();
    let r = json(&dnet(&["select", "--config", sel.to_str().unwrap()]));
    assert_eq!(r["cover_size"], 136);
    assert_eq!(r["selection"]["trace"].as_array().unwrap().len(), 136);
}
