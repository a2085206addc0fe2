use std::path::Path;
use std::process::{Command, Output};

fn rfda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn single_run_dir(out: &Path) -> std::path::PathBuf {
    let dirs: Vec<_> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

#[test]
fn mmin_prints_the_reference_value() {
    let o = rfda(&[
        "mmin",
        "--beta",
        "0.4",
        "--dtheta-deg",
        "5",
        "--theta-b-deg",
        "45",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "15.73");
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let o = rfda(&["--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"array": {"M": 16, "antennas": 3}}"#).unwrap();
    let o = rfda(&["--config", cfg.to_str().unwrap(), "capacity"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rate_sweep_infeasible_everywhere_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // log2(1 + 10⁴) ≈ 13.29 bits is the ceiling at 40 dBm
    let o = rfda(&[
        "sweep",
        "rate",
        "--scheme",
        "no-an",
        "--pt-dbm",
        "40",
        "--rs",
        "13.5,14",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn rate_sweep_leaves_gaps_for_infeasible_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = rfda(&[
        "sweep",
        "rate",
        "--pt-dbm",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(single_run_dir(dir.path()).join("result.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("6,"), "{csv}");
    assert!(last.split(',').any(str::is_empty), "{last}");
}

#[test]
fn gen_k_below_three_elements_exits_3() {
    assert_eq!(rfda(&["gen-k", "--m", "2"]).status.code(), Some(3));
}

#[test]
fn missing_fixture_file_exits_5() {
    let o = rfda(&["validate-fixtures", "--fixture", "/definitely/not/here.csv"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn corrupted_fixture_reports_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let mut row = vec!["K10405".to_string()];
    row.extend((0..16).map(|i| format!("{}", i as f64 - 7.5)));
    std::fs::write(
        &p,
        format!(
            "label,{}\n{}\n",
            (1..=16)
                .map(|i| format!("m{i}"))
                .collect::<Vec<_>>()
                .join(","),
            row.join(",")
        ),
    )
    .unwrap();
    let o = rfda(&["validate-fixtures", "--fixture", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("[FAIL] K10405"));
}

#[test]
fn builtin_fixtures_validate() {
    let o = rfda(&["validate-fixtures"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn sweep_writes_artifacts_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "--mode".to_string(),
            "mc".into(),
            "--trials".into(),
            "300".into(),
            "--seed".into(),
            "7".into(),
            "--svg".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
            "sweep".into(),
            "power".into(),
            "--start".into(),
            "0".into(),
            "--stop".into(),
            "20".into(),
            "--step".into(),
            "10".into(),
        ]
    };
    for out in [a.path(), b.path()] {
        let args = args(out);
        let o = rfda(&args.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let (da, db) = (single_run_dir(a.path()), single_run_dir(b.path()));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["result.csv", "manifest.json", "plot.svg"] {
        assert_eq!(
            std::fs::read(da.join(f)).unwrap(),
            std::fs::read(db.join(f)).unwrap(),
            "{f}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(da.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(da
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("power-"));
    let header = std::fs::read_to_string(da.join("result.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "pt_dbm,with_an,with_an_se,without_an,without_an_se"
    );
}

#[test]
fn beampattern_peaks_at_bob() {
    let o = rfda(&["beampattern", "--r-step", "4", "--theta-step-deg", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("range_m,theta_deg,power"));
    let best = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .max_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert_eq!((best[0], best[1]), (100.0, 45.0));
    assert!((best[2] - 1.0).abs() < 1e-12);
}

#[test]
fn capacity_lb_matches_library() {
    let o = rfda(&["capacity", "--scheme", "an", "--pt-dbm", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("beta: ")));
    assert!(out.lines().any(|l| l.starts_with("with_an: ")));
    assert!(!out.contains("without_an"));
}
