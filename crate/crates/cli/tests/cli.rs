use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slater-barron"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn measure(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fig1_default_grid() {
    let o = run(&["fig1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["y", "gamma", "highpass_relu"]);
    assert_eq!(rows.len(), 4 * 2001);
    let origin = rows.iter().find(|r| num(&r[0]) == 0.0 && num(&r[1]) == 1.0).unwrap();
    let v: f64 = origin[2].parse().unwrap();
    assert!((v + 1.0 / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn fig1_curves_cross_zero() {
    let o = run(&["fig1", "--gammas", "0.5", "--y-min", "-10", "--y-max", "10", "--points", "201"]);
    assert!(o.status.success());
    let (_, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 201);
    let v: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let crossings = v.windows(2).filter(|p| p[0].signum() != p[1].signum()).count();
    assert!(crossings >= 2, "{crossings}");
}

#[test]
fn fig1_cos_term_crosses_twice_as_often_at_double_gamma() {
    let o = run(&["fig1", "--gammas", "1,2"]);
    let (_, rows) = parse_csv(&stdout(&o));
    let crossings = |g: f64| {
        let c: Vec<f64> = rows.iter().filter(|r| num(&r[1]) == g).map(|r| (g * num(&r[0])).cos()).collect();
        c.windows(2).filter(|p| p[0].signum() != p[1].signum()).count()
    };
    assert_eq!(crossings(1.0), 6);
    assert_eq!(crossings(2.0), 2 * crossings(1.0));
}

#[test]
fn fig2_starts_at_zero_and_is_reproducible() {
    let args = ["fig2", "--n", "6", "--d", "2", "--seed", "3", "--points", "41", "--theta-max", "4"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let (header, rows) = parse_csv(&stdout(&a));
    assert_eq!(&header[..2], ["theta", "norm_sq"]);
    assert_eq!(rows.len(), 41);
    assert_eq!(num(&rows[0][0]), 0.0);
    let first: f64 = rows[0][1].parse().unwrap();
    assert!(first.abs() < 1e-12);
    for r in &rows {
        let v: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&v), "{v}");
    }
}

#[test]
fn construct_single_atom_holds() {
    let dir = tempfile::tempdir().unwrap();
    let sum = dir.path().join("sum.json");
    let report = dir.path().join("report.json");
    let o = run(&[
        "construct",
        "--measure",
        measure("single_atom_n3_d1.json").to_str().unwrap(),
        "--m",
        "16",
        "--seed",
        "1",
        "--mc-samples",
        "16384",
        "--output",
        sum.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["holds"], serde_json::Value::Bool(true));
    assert!(r["right_side"].as_f64().unwrap() > 0.0);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sum).unwrap()).unwrap();
    assert!(s.is_object());
}

#[test]
fn construct_right_side_shrinks_by_sqrt_two() {
    let bound = |m: &str| {
        let o = run(&[
            "construct", "--measure", measure("single_atom_n3_d1.json").to_str().unwrap(), "--m", m, "--mc-samples", "256",
        ]);
        assert!(o.status.success());
        let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        r["sampling_bound"].as_f64().unwrap()
    };
    let ratio = bound("16") / bound("32");
    assert!((ratio - 2f64.sqrt()).abs() < 1e-12, "{ratio}");
}

#[test]
fn construct_rejects_empty_measure() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("empty.json");
    std::fs::write(&m, r#"{"n": 3, "d": 1, "atoms": []}"#).unwrap();
    let o = run(&["construct", "--measure", m.to_str().unwrap(), "--m", "4"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn construct_requires_measure() {
    let o = run(&["construct"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("measure"));
}

#[test]
fn bounds_margins_are_nonnegative() {
    let o = run(&["bounds", "--ns", "20,30", "--ds", "1,2", "--w-infs", "0.1,half_gamma"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["n", "d", "p", "w_inf", "log_det", "log_bound", "margin", "error"]);
    assert_eq!(rows.len(), 8);
    let mut feasible = 0;
    for r in &rows {
        if r[6].is_empty() {
            assert!(r[7].starts_with("infeasible"), "{r:?}");
        } else {
            feasible += 1;
            assert!(r[6].parse::<f64>().unwrap() >= 0.0, "{r:?}");
        }
    }
    assert_eq!(feasible, 4);
}

#[test]
fn bounds_rejects_bad_w_inf() {
    let o = run(&["bounds", "--w-infs", "quarter"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scatter_writes_one_row_per_window() {
    let o = run(&[
        "scatter", "--n", "2", "--m", "4", "--centers", "-0.5,0.5", "--halfwidths", "2", "--steps", "40", "--batch",
        "32", "--restarts", "1", "--eval-samples", "256",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header[0], "window_center");
    assert_eq!(header.len(), 8);
    assert_eq!(rows.len(), 2);
    assert_eq!(num(&rows[0][0]), -0.5);
}

#[test]
fn norm_of_zero_target_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    let o = run(&[
        "norm", "--target", "zero", "--n", "2", "--m", "4", "--epsilon", "0", "--steps", "600", "--batch", "32",
        "--eval-samples", "512", "--log", log.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header[0], "estimate");
    let est: f64 = rows[0][0].parse().unwrap();
    assert!(est < 1e-3, "{est}");
    let (lh, lrows) = parse_csv(&std::fs::read_to_string(&log).unwrap());
    assert_eq!(lh, ["step", "loss", "penalty1", "penalty2"]);
    assert!(!lrows.is_empty());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig1.json");
    std::fs::write(&cfg, r#"{"gammas": [1.0], "points": 11}"#).unwrap();
    let o = run(&["fig1", "--config", cfg.to_str().unwrap(), "--points", "5"]);
    assert!(o.status.success());
    let (_, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 5);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"gammas": [1.0], "pionts": 11}"#).unwrap();
    let o = run(&["fig1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pionts"));
}

#[test]
fn invalid_values_exit_one() {
    assert_eq!(run(&["fig1", "--gammas", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["fig2", "--n", "0"]).status.code(), Some(1));
    assert_eq!(run(&["norm", "--steps", "0"]).status.code(), Some(1));
    assert_eq!(run(&["fig1", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn help_lists_config_keys() {
    let o = run(&["scatter", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["centers", "halfwidths", "epsilon", "converge_window", "eval_samples", "learning_rate"] {
        assert!(text.contains(key), "missing {key}");
    }
    let o = run(&["norm", "--help"]);
    assert!(stdout(&o).contains("window_halfwidth"));
}

#[test]
fn selftest_rejects_unknown_criterion() {
    assert_eq!(run(&["selftest", "--criteria", "99"]).status.code(), Some(1));
}

#[test]
fn selftest_runs_a_fast_criterion() {
    let o = run(&["selftest", "--criteria", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("PASS [ 2]"), "{text}");
    assert_eq!(text.lines().count(), 1);
}
