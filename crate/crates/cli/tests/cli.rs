use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cohlim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohlim"))
        .args(args)
        .env_remove("COHLIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn transform_rows() {
    let o = cohlim(&["transform", "--chart", "tau", "--coords", "0.5,0", "--k", "1", "--to", "canonical"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "chart,x,y\ncanonical,0.8,1.6666666667\n");

    let o = cohlim(&["transform", "--coords", "0,0", "--to", "halfplane"]);
    assert_eq!(stdout(&o), "chart,x,y\nhalfplane,1,0\n");
}

#[test]
fn transform_rejects_points_off_the_disk() {
    let o = cohlim(&["transform", "--coords", "1.5,0", "--chart", "tau"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("tau modulus must be < 1"));
}

#[test]
fn transform_round_trips_through_every_chart() {
    let o = cohlim(&["transform", "--coords", "-0.3,0.45", "--k", "2"]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let back = cohlim(&[
            "transform", "--chart", &row[0], "--coords", &format!("{},{}", row[1], row[2]),
            "--k", "2", "--to", "tau",
        ]);
        let r = &csv_rows(&back)[0];
        assert!((num(&r[1]) + 0.3).abs() < 1e-9 && (num(&r[2]) - 0.45).abs() < 1e-9, "{row:?} -> {r:?}");
    }
}

#[test]
fn symbols_at_half() {
    let o = cohlim(&["symbols", "--tau", "0.5,0", "--k", "1", "--N", "1"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    let get = |name: &str| rows.iter().find(|r| r[0] == name).unwrap().clone();
    for col in 1..4 {
        assert!((num(&get("K0")[col]) - 5.0 / 3.0).abs() < 1e-9);
        assert!((num(&get("K1")[col]) - 4.0 / 3.0).abs() < 1e-9);
        assert!((num(&get("B")[col]) - 8.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn resolution_check_codes() {
    let o = cohlim(&["resolution-check", "--J", "3", "--max-n", "5", "--order", "64"]);
    assert_eq!(code(&o), 0);
    assert!(num(&csv_rows(&o)[0][3]) < 1e-8);
    let o = cohlim(&["resolution-check", "--J", "0.4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn overlap_matches_truncation() {
    let o = cohlim(&["overlap", "--tau", "0.3,-0.1", "--tau2", "-0.2,0.4", "--N", "3"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows[0][3], rows[1][3]);
    assert_eq!(rows[0][3], rows[3][3]);
}

#[test]
fn evolve_classical_free_particle_row() {
    let o = cohlim(&["evolve", "--mode", "classical", "--h", "C", "--start", "0,1", "--k", "1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("t,A,B,C,energy\n"));
    assert!(out.lines().any(|l| l == "1,2,2,1,1"), "{out}");
}

#[test]
fn evolve_tmax_zero_is_one_row() {
    let o = cohlim(&["evolve", "--mode", "quantum", "--h", "C", "--tau0", "0.2,0.1", "--tmax", "0"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
}

#[test]
fn evolve_both_free_particle_deviation() {
    let o = cohlim(&["evolve", "--mode", "both", "--h", "C", "--tau0", "0,0", "--k", "1", "--N", "8", "--tmax", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let header: Vec<&str> = out.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "deviation").unwrap();
    for row in csv_rows(&o) {
        assert!(num(&row[col]) < 1e-8, "{row:?}");
    }
}

#[test]
fn freeparticle_matches_closed_form() {
    let o = cohlim(&["freeparticle", "--start", "0,1", "--k", "1", "--tmax", "5", "--steps", "10"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    let at2 = rows.iter().find(|r| r[0] == "2").unwrap();
    assert_eq!((at2[1].as_str(), at2[2].as_str()), ("0.4", "5"));
}

#[test]
fn casimir_check_reports() {
    let o = cohlim(&["casimir-check", "--N", "2", "--d", "12"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["casimir"]["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["pass"], Value::Bool(true));

    let o = cohlim(&["casimir-check", "--N", "1", "--d", "30"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ks: Vec<f64> = v["l_spectrum"]["sectors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["k"].as_f64().unwrap())
        .collect();
    assert_eq!(ks.len(), 2);
    assert!((ks[0] - 0.25).abs() < 1e-10 && (ks[1] - 0.75).abs() < 1e-10);

    let o = cohlim(&["casimir-check", "--N", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("N must be ≤ 3"));
}

#[test]
fn limit_check_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cohlim(&["limit-check", "--study", "overlap-decay,factorization", "--out", out, "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    let overlap: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("overlap-decay.json")).unwrap()).unwrap();
    let re_delta = -(0.75f64).ln();
    assert!((overlap["slope"].as_f64().unwrap() + re_delta).abs() < 1e-9);
    for key in ["slope", "intercept", "residual", "pass"] {
        assert!(overlap.get(key).is_some(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("factorization.csv")).unwrap();
    assert!(csv.starts_with("N,value,reference,abs_error\n"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn limit_check_zero_defect_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let o = cohlim(&[
        "limit-check", "--study", "factorization", "--x", "K0", "--y", "K0", "--tau", "0,0",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("factorization.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
}

#[test]
fn limit_check_failure_sets_exit_one() {
    // two N values cannot support a slope fit
    let o = cohlim(&["limit-check", "--study", "hamiltonian", "--h", "A^2", "--N", "2,4"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("hamiltonian,false"));
}

#[test]
fn config_sections_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "[transform]\ncoords = 0.5,0\nk = 1\nto = canonical\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = cohlim(&["--config", c, "transform"]);
    assert_eq!(stdout(&o), "chart,x,y\ncanonical,0.8,1.6666666667\n");
    let o = cohlim(&["--config", c, "transform", "--coords", "-0.5,0"]);
    assert_eq!(stdout(&o), "chart,x,y\ncanonical,-0.8,1.6666666667\n");

    fs::write(&cfg, "[factorization]\ntau = 0,0\n[hamiltonian]\nN = 2,4\n").unwrap();
    let o = cohlim(&["--config", c, "limit-check", "--study", "factorization,hamiltonian"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("factorization,true,,,,0\n"), "{out}");
    assert!(out.contains("hamiltonian,false"), "{out}");
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[evolve]\nspeed = 3\n").unwrap();
    let o = cohlim(&["--config", cfg.to_str().unwrap(), "evolve"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown config key `speed`"));
    fs::write(&cfg, "[warp]\nk = 1\n").unwrap();
    assert_eq!(code(&cohlim(&["--config", cfg.to_str().unwrap(), "evolve"])), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["limit-check", "--study", "factorization,bracket", "--N", "2..64:x2"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cohlim"))
            .args(args)
            .env("COHLIM_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(code(&run("0")), 2);
}
