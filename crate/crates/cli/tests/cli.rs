use std::process::{Command, Output};

fn hkforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkforge"))
        .args(args)
        .env_remove("HKFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("hkforge-cli-{}-{name}", std::process::id()))
}

#[test]
fn pentagon_identity_verdict() {
    let o = hkforge(&["wcf-check", "--model", "pentagon", "--order", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "pentagon identity: PASS order 8"));
}

#[test]
fn dump_series_lists_terms() {
    let o = hkforge(&["wcf-check", "--model", "pentagon", "--order", "3", "--dump-series"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // K(0,1)^* X(1,0) = X(1,0) - X(1,1) + X(1,2) at order 3
    assert!(out.contains("(1,1) : -1/1"), "{out}");
    assert!(out.contains("(1,2) : 1/1"), "{out}");
}

#[test]
fn ov_solve_takes_one_iteration() {
    let o = hkforge(&[
        "solve", "--model", "ov", "--u", "0.5,0", "--R", "1", "--theta", "0.3,1.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("converged: iterations 1 "));
}

#[test]
fn tiny_radius_is_refused() {
    let o = hkforge(&[
        "solve", "--model", "pentagon", "--u", "0,0", "--R", "0.01", "--theta", "0,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: r-too-small: R too small"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["solve", "--model", "ov", "--u", "0.5", "--R", "1"][..],
        &["solve", "--model", "no-such-model", "--u", "0.5,0", "--R", "1"],
        &["solve", "--model", "ov", "--u", "0.5,0", "--R", "-1"],
        &["solve", "--model", "ov", "--u", "0.5,0", "--R", "1", "--tol", "0"],
        &["solve", "--model", "ov", "--u", "0.5,0", "--R", "1", "--theta", "1,2,3"],
        &["wcf-check", "--model", "pentagon", "--order", "0"],
        &["frobnicate"],
    ] {
        let o = hkforge(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_hkforge"))
        .args(["wcf-check", "--model", "pentagon", "--order", "2"])
        .env("HKFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hkforge"))
        .args(["decay-scan", "--model", "pentagon", "--u", "0.5,0.3", "--R-list", "1,2"])
        .env("HKFORGE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn solution_file_round_trip_and_jump_check() {
    let path = temp_path("pentagon.sol");
    let p = path.to_str().unwrap();
    let o = hkforge(&[
        "solve", "--model", "pentagon", "--u", "0.3,-0.2", "--R", "2", "--theta", "0.7,2.1", "--output", p,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = hkforge(&["jump-check", "--model", "pentagon", "--solution", p]);
    assert_eq!(j.status.code(), Some(0), "{}", stderr(&j));
    assert!(stdout(&j).lines().last().unwrap().starts_with("jumps: PASS"));
    let m = hkforge(&["jump-check", "--model", "ov", "--solution", p]);
    assert_eq!(m.status.code(), Some(1));
    assert!(stderr(&m).starts_with("error: model-mismatch:"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn identical_config_gives_identical_output() {
    let args = [
        "tree-compare",
        "--model",
        "pentagon",
        "--u",
        "0,0",
        "--R",
        "0.7",
        "--cutoff",
        "2",
        "--zeta",
        "0.6,0.45",
    ];
    let a = hkforge(&args);
    let b = hkforge(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let (pa, pb) = (temp_path("a.sol"), temp_path("b.sol"));
    for p in [&pa, &pb] {
        let o = hkforge(&[
            "solve",
            "--model",
            "pentagon",
            "--u",
            "0.4,0.3",
            "--R",
            "1.5",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    std::fs::remove_file(&pa).ok();
    std::fs::remove_file(&pb).ok();
}

#[test]
fn validate_reports_every_chamber() {
    let o = hkforge(&["validate", "--model", "pentagon", "--grid", "3", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert!(rows[0].starts_with("chamber\tpoints\t"));
    let labels: Vec<&str> = rows[1..4].iter().map(|r| r.split('\t').next().unwrap()).collect();
    assert_eq!(labels, ["in", "out+", "out-"]);
    assert_eq!(rows[4], "conditions: PASS tol 1e-8");
}

#[test]
fn wall_check_and_negative_control() {
    let good = hkforge(&["wall-check", "--model", "pentagon", "--halvings", "2"]);
    assert_eq!(good.status.code(), Some(0), "{}", stdout(&good));
    let bad = hkforge(&[
        "wall-check",
        "--model",
        "pentagon",
        "--halvings",
        "2",
        "--negative-control",
    ]);
    assert_eq!(bad.status.code(), Some(0), "{}", stdout(&bad));
    assert!(stdout(&bad).contains("negative control"));
    let ov = hkforge(&["wall-check", "--model", "ov"]);
    assert_eq!(ov.status.code(), Some(1));
    assert!(stderr(&ov).starts_with("error: unsupported:"));
}

#[test]
fn ov_compare_passes() {
    let o = hkforge(&[
        "ov-compare",
        "--u",
        "-0.2,0.6",
        "--R",
        "0.5",
        "--theta",
        "0.3,1.1",
        "--zeta",
        "0.3,-0.8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ov: PASS iterations 1"));
}

#[test]
fn metric_report_is_positive() {
    let o = hkforge(&[
        "metric", "--model", "pentagon", "--u", "0.1,0.2", "--R", "3", "--theta", "0.7,2.3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("eigenvalues:"));
    assert!(out
        .lines()
        .last()
        .unwrap()
        .starts_with("metric: PASS positive definite true"));
}

#[test]
fn model_info_and_semiflat_sample() {
    let o = hkforge(&["model-info", "ov"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("chamber disc (1,0):1 (-1,0):1"));
    assert!(out.contains("model_id = \"ooguri-vafa\""));

    let cfg = temp_path("model.toml");
    let text = out.split("config:\n").nth(1).unwrap();
    std::fs::write(&cfg, text).unwrap();
    let s = hkforge(&[
        "semiflat-sample",
        "--model",
        cfg.to_str().unwrap(),
        "--u",
        "0.3,0.1",
        "--R",
        "1",
        "--zeta-grid",
        "4",
    ]);
    assert_eq!(s.status.code(), Some(0), "{}", stderr(&s));
    assert_eq!(stdout(&s).lines().count(), 1 + 4 * 2);
    std::fs::remove_file(&cfg).ok();
}
