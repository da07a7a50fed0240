use std::path::Path;
use std::process::Command;

fn blurlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blurlab")).args(args).output().expect("binary runs")
}

fn read_csv(dir: &Path, experiment: &str) -> String {
    std::fs::read_to_string(dir.join(format!("{experiment}.csv"))).expect("csv written")
}

#[test]
fn same_seed_same_report_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let out = blurlab(&[
            "divergences",
            "--instances",
            "12",
            "--seed",
            "41",
            "--jobs",
            jobs,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read_csv(a.path(), "divergences"), read_csv(b.path(), "divergences"));
    let strip = |p: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p.join("divergences.json")).unwrap()).unwrap();
        v["runtime_ms"] = serde_json::Value::Null;
        v["config"]["out"] = serde_json::Value::Null;
        for r in v["records"].as_array_mut().unwrap() {
            r["runtime_ms"] = serde_json::Value::Null;
        }
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let out = blurlab(&["classical-lemma", "--instances", "3", "--seed", seed, "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_ne!(read_csv(a.path(), "classical-lemma"), read_csv(b.path(), "classical-lemma"));
}

#[test]
fn validate_reports_field_and_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "quantum-blurring", "seed": 1, "params": {"delta": 0.9}}"#).unwrap();
    let out = blurlab(&["validate", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("params.delta: delta must be in (0, 1/2], got 0.9"), "{err}");

    // unknown keys are rejected rather than ignored
    std::fs::write(&cfg, r#"{"experiment": "axioms", "params": {"detla": 0.2}}"#).unwrap();
    let out = blurlab(&["validate", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("detla"));

    std::fs::write(&cfg, r#"{"experiment": "axioms", "seed": 4}"#).unwrap();
    let out = blurlab(&["validate", cfg.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn fock_convergence_csv_rows_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = blurlab(&[
        "fock-convergence",
        "--d",
        "2",
        "--delta",
        "0.4",
        "--h",
        "2",
        "--k",
        "1",
        "--n",
        "40,80,160",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = read_csv(dir.path(), "fock-convergence");
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<(String, f64)> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| r[1].starts_with("e_n"))
        .map(|r| (r[1].to_string(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].1 > rows[1].1 && rows[1].1 > rows[2].1, "{rows:?}");
    assert!(rows[2].1 < 0.05);
}

#[test]
fn run_config_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("axioms.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(r#"{{"experiment": "axioms", "seed": 9, "out": {}}}"#, serde_json::to_string(&out_dir).unwrap()),
    )
    .unwrap();
    let out = blurlab(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("axioms.json")).unwrap()).unwrap();
    assert_eq!(report["fingerprint"]["seed"], 9);
    assert_eq!(report["tally"]["fail"], 0);

    // a configuration error exits with 2, distinct from a failed check (1)
    let out = blurlab(&["vacuum-support", "--Delta", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_and_family_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("one_photon.json");
    std::fs::write(&state, r#"{"modes": 1, "cutoff": 4, "amplitudes": [[0,0],[1,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    let out = blurlab(&["vacuum-support", "--state", state.to_str().unwrap(), "--nodes", "32"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("PASS         vacuum-support input state"), "{text}");

    let family = dir.path().join("family.json");
    std::fs::write(&family, "{\"not\": \"a family\"}").unwrap();
    let out = blurlab(&["axioms", "--family", family.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inputs.family"));
}

#[test]
fn list_names_every_experiment() {
    let out = blurlab(&["list"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for e in blurlab_cli::catalog::EXPERIMENTS {
        assert!(text.contains(e.id));
    }
}
