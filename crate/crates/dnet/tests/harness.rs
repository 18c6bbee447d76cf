use dnet::config::ExperimentConfig;
use dnet::report::{emit_reports, parse_records_csv, records_csv, summary_csv};
use dnet::sweep::{replay_trial, run_sweep, run_theorem1_sweep, summarize};
use dnet::{HarnessError, SUMMARY_SCHEMA};
use dnet_core::markov::SigmaMode;
use dnet_core::{uniform_points, Mat, Network, NetworkSpec, Point};

fn config(dir: &std::path::Path) -> ExperimentConfig {
    let text = format!(
        r#"{{
            "kind": "theorem1",
            "network": {{ "random": {{ "widths": [6, 4, 4], "seed": 3, "count": 2 }} }},
            "m_grid": [8, 32],
            "seeds": {{ "count": 20 }},
            "points": {{ "uniform": {{ "n": 64, "seed": 4 }} }},
            "output": {{ "dir": {:?}, "stem": "t" }}
        }}"#,
        dir.display().to_string()
    );
    ExperimentConfig::from_json(&text, "inline").unwrap()
}

fn single_path_net() -> Network {
    Network::new(
        1.5,
        vec![
            Mat::row_vector(&[0.0, 2.0]),
            Mat::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.5]]).unwrap(),
        ],
        false,
    )
    .unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let cfg = config(dir);
        let (r, _, _) = run_theorem1_sweep(&cfg).unwrap();
        emit_reports(dir, "t", &r.records, &r.summary).unwrap();
    }
    for name in ["t_trials.csv", "t_summary.json", "t_summary.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    assert!(!a.path().join("t_trials.csv.tmp").exists());
}

#[test]
fn csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    let bytes = records_csv(&r.records).unwrap();
    let back = parse_records_csv(&bytes).unwrap();
    assert_eq!(back, r.records);
    for (x, y) in back.iter().zip(&r.records) {
        assert_eq!(x.empirical_error.to_bits(), y.empirical_error.to_bits());
    }
}

#[test]
fn one_record_gives_header_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    let text = String::from_utf8(records_csv(&r.records[..1]).unwrap()).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("net,seed,m,empirical_error,"));
    assert!(records_csv(&[]).is_err());
}

#[test]
fn summary_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    let schema: serde_json::Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance = serde_json::to_value(&r.summary).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    let mut broken = instance.clone();
    broken["cells"][0].as_object_mut().unwrap().remove("refined");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn trials_replay_and_flags_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let (r, nets, points) = run_theorem1_sweep(&config(dir.path())).unwrap();
    for rec in r.records.iter().step_by(7) {
        let (err, hash) = replay_trial(&nets[rec.net], &points, rec).unwrap();
        assert_eq!(err.to_bits(), rec.empirical_error.to_bits());
        assert_eq!(hash, rec.cover_hash);
    }
    let parsed = parse_records_csv(&records_csv(&r.records).unwrap()).unwrap();
    assert_eq!(summarize(&parsed).unwrap(), r.summary);
    assert!(r.records.iter().all(|t| t.empirical_error >= 0.0 && t.wall_time_ms.is_none()));
}

#[test]
fn hash_depends_on_seed_m_and_net() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    let (again, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    assert_eq!(
        r.records.iter().map(|t| &t.cover_hash).collect::<Vec<_>>(),
        again.records.iter().map(|t| &t.cover_hash).collect::<Vec<_>>()
    );
    let a = &r.records[0];
    let other_net = r.records.iter().find(|t| t.net != a.net && t.seed == a.seed && t.m == a.m).unwrap();
    assert_ne!(a.cover_hash, other_net.cover_hash);
}

#[test]
fn deterministic_net_has_zero_error() {
    let net = single_path_net();
    let points: Vec<Point> = uniform_points(1, 32, 1);
    let r = run_sweep(&[net], &points, &[1, 4, 16], &[0, 1, 2], SigmaMode::Estimate, false).unwrap();
    assert!(r.records.iter().all(|t| t.empirical_error == 0.0));
    assert!(r.summary.all_pass);
    assert!(r.summary.decay[0].slope_min.is_none());
}

#[test]
fn sweep_bounds_dominate() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = run_theorem1_sweep(&config(dir.path())).unwrap();
    for c in &r.summary.cells {
        assert_eq!(c.refined_le_bound2, Some(true));
        assert!(c.min_le_mean);
    }
    let text = String::from_utf8(summary_csv(&r.summary).unwrap()).unwrap();
    assert!(text.lines().next().unwrap() == "net,m,metric,value");
}

#[test]
fn config_errors_name_the_field() {
    let bad = |text: &str| match ExperimentConfig::from_json(text, "cfg.json") {
        Err(HarnessError::Config { file, field, .. }) => (file, field),
        other => panic!("{other:?}"),
    };
    let base = r#""network": {"random": {"widths": [4, 4], "seed": 1}}"#;
    assert_eq!(bad(&format!(r#"{{"kind": "theorem1", {base}, "m_grid": []}}"#)).1, "m_grid");
    assert_eq!(
        bad(&format!(r#"{{"kind": "theorem1", {base}, "m_grid": [4], "seeds": [1, 1]}}"#)).1,
        "seeds"
    );
    assert_eq!(
        bad(r#"{"kind": "theorem1", "network": {"random": {"widths": [3], "seed": 1}}, "m_grid": [4]}"#).1,
        "network.random.widths"
    );
    let (file, _) = bad("{");
    assert_eq!(file, "cfg.json");
}

#[test]
fn network_files_and_datasets_load() {
    let dir = tempfile::tempdir().unwrap();
    let net_path = dir.path().join("net.json");
    std::fs::write(&net_path, NetworkSpec::from_network(&single_path_net()).to_json()).unwrap();
    let data_path = dir.path().join("x.json");
    std::fs::write(&data_path, "[[0.5], [-0.25], [1.0]]").unwrap();
    let text = format!(
        r#"{{"kind": "theorem1", "network": {{"file": {{"path": {:?}}}}}, "m_grid": [2],
            "seeds": [5, 9], "points": {{"dataset": {{"path": {:?}}}}}}}"#,
        net_path.display().to_string(),
        data_path.display().to_string()
    );
    let cfg = ExperimentConfig::from_json(&text, "inline").unwrap();
    let (r, _, points) = run_theorem1_sweep(&cfg).unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(r.records.len(), 2);

    std::fs::write(&data_path, "[[0.5, 1.0]]").unwrap();
    match run_theorem1_sweep(&cfg) {
        Err(HarnessError::Config { field, .. }) => assert_eq!(field, "points[0]"),
        other => panic!("{other:?}"),
    }
}
