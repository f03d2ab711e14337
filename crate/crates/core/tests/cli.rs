use std::process::{Command, Output};

fn coupstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupstab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bounds_single_point() {
    let o = coupstab(&["bounds", "--d", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("beta_max_explicit,3"));
    assert!(stdout(&o).contains("beta_implicit_pole,3\n"));
}

#[test]
fn bounds_table() {
    let o = coupstab(&["bounds", "--d-min", "0.5", "--d-max", "4", "--points", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("d,beta_max_explicit,beta_beljaars,beta_implicit_pole\n0.5,{},{},1\n4,4,{},8\n", 1.0 + 2f64.sqrt(), 2.0 + 0.5f64.powf(0.55), 2.0 + 4f64.powf(0.55)));
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["sweep"][..], &["frobnicate"], &["bounds", "--bogus"], &["sweep", "--config", "/nonexistent/sweep.toml"]] {
        let o = coupstab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).to_lowercase().contains("usage") || stderr(&o).contains("--help"), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(coupstab(&["--help"]).status.code(), Some(0));
}

#[test]
fn validate_one_way_passes() {
    let o = coupstab(&["validate", "--suite", "one-way"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().ends_with(", 0 failures"));
    assert!(out.lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn spectrum_lists_every_eigenvalue() {
    let o = coupstab(&["spectrum", "--scheme", "one-way-explicit", "--d-minus", "1", "--beta-minus", "4", "--n-minus", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "re,im");
    assert_eq!(lines.len(), 8);
    let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    assert!(first.abs() > 1.0);
    assert!(stderr(&o).contains("unstable"));
}

#[test]
fn dump_and_sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = coupstab(&["dump-matrices", "--scheme", "bulk-sequential", "--d-minus", "1", "--beta-minus", "2", "--n-minus", "3", "--n-plus", "2", "--out-dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = std::fs::read_to_string(dir.path().join("A.csv")).unwrap();
    assert_eq!(a.lines().count(), 5);
    assert!(a.lines().all(|l| l.split(',').count() == 5));
    assert!(dir.path().join("M.csv").exists());

    let o = coupstab(&["sweep", "--preset", "fig7", "--points", "5", "--n-minus", "6", "--out-dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("fig7_one-way-implicit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.lines().skip(1).all(|l| !l.ends_with("unstable")));
    let pgm = std::fs::read_to_string(dir.path().join("fig7_one-way-explicit.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n5 5\n255\n"));
    assert!(dir.path().join("fig7_one-way-explicit.csv.meta.toml").exists());
}

#[test]
fn simulate_partitioned_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = coupstab(&[
        "simulate", "--scheme", "dn-implicit", "--d-plus", "0.4", "--d-minus", "2", "--r", "0.5", "--steps", "80", "--partitioned", "--seed", "3",
        "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("step,norm,growth_estimate"));
    assert_eq!(text.lines().count(), 82);
    assert!(stderr(&o).contains("growth rate"));
}
