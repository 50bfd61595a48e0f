use std::fs;

use levyhull::closed_form::expected_faces_yn;
use levyhull::experiments::{ExperimentConfig, ExperimentKind};
use levyhull::report::{emit_plot_data, load_config, run_all, run_all_with, smoke_suite, RunOptions, CSV_COLUMNS};
use levyhull::stable::StableSpec;
use levyhull::Error;

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, StableSpec::brownian(2));
    c.trials = 200;
    c.n_steps = 200;
    c
}

#[test]
fn rerun_is_byte_identical_apart_from_timestamp() {
    let configs = smoke_suite(5);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run_all(&configs, a.path()).unwrap();
    let mb = run_all(&configs, b.path()).unwrap();
    assert_eq!(fs::read(a.path().join("results.csv")).unwrap(), fs::read(b.path().join("results.csv")).unwrap());
    assert_eq!(ma.config_digest, mb.config_digest);
    assert_eq!(ma.results, mb.results);
    for f in ["summary.json", "manifest.json"] {
        assert!(a.path().join(f).is_file());
    }
    let text = fs::read_to_string(a.path().join("results.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert!(!text.contains('\r'));
    assert_eq!(ma.exit_status(), 0);
}

#[test]
fn zero_tolerance_fails() {
    let mut c = small(ExperimentKind::GramDeterminant);
    c.tolerance_sigma = 0.0;
    let dir = tempfile::tempdir().unwrap();
    let m = run_all(&[c], dir.path()).unwrap();
    assert_eq!(m.exit_status(), 1);
}

#[test]
fn intrinsic_volume_series_has_target_columns() {
    let mut c = small(ExperimentKind::IntrinsicVolumes);
    c.n_values = vec![50, 200];
    let dir = tempfile::tempdir().unwrap();
    let m = run_all(&[c], dir.path()).unwrap();
    let files = emit_plot_data(&m, dir.path()).unwrap();
    assert_eq!(files.len(), 1);
    let text = fs::read_to_string(&files[0]).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for col in ["n", "mean", "stderr", "target"] {
        assert!(header.contains(&col), "{header:?}");
    }
    assert_eq!(text.lines().count(), 1 + 2 * 2);
}

#[test]
fn faces_series_carries_analytic_column() {
    let mut c = small(ExperimentKind::FacesCount);
    c.n_values = vec![10, 40];
    let dir = tempfile::tempdir().unwrap();
    let m = run_all(&[c], dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("plots/faces_count_vs_n.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let target_col = rdr.headers().unwrap().iter().position(|h| h == "target").unwrap();
    for (rec, n) in rdr.records().zip([10, 40]) {
        let t: f64 = rec.unwrap()[target_col].parse().unwrap();
        assert_eq!(t, expected_faces_yn(n, 2).unwrap());
    }
    assert_eq!(m.results.len(), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut c = small(ExperimentKind::BoundaryOrigin);
    c.n_values = vec![20, 200];
    let mut out = Vec::new();
    for threads in [1, 3] {
        let dir = tempfile::tempdir().unwrap();
        run_all_with(&[c.clone()], dir.path(), &RunOptions { threads: Some(threads), dump_polytopes: true }).unwrap();
        out.push(fs::read(dir.path().join("results.csv")).unwrap());
    }
    assert_eq!(out[0], out[1]);
}

#[test]
fn polytope_dump_is_json() {
    let c = small(ExperimentKind::IntrinsicVolumes);
    let dir = tempfile::tempdir().unwrap();
    run_all_with(&[c], dir.path(), &RunOptions { threads: None, dump_polytopes: true }).unwrap();
    let text = fs::read_to_string(dir.path().join("polytopes/intrinsic_volumes_0.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["vertices"].as_array().unwrap().len() >= 3);
}

#[test]
fn load_config_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"experiments": [{"experiment": "GramDeterminant", "trials": 500,
        "spec": {"alpha": 2.0, "c": 0.5, "d": 3, "flavor": "Brownian"}}]}"#)
        .unwrap();
    let c = load_config(&path).unwrap();
    assert_eq!(c[0].trials, 500);
    assert!(matches!(load_config(&dir.path().join("missing.json")), Err(Error::Io(_))));
}
