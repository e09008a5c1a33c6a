use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elliptheta")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn parse_c(s: &str) -> (f64, f64) {
    let (re, im) = s.trim().split_once(',').unwrap();
    (re.parse().unwrap(), im.parse().unwrap())
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn pochhammer_with_negative_index() {
    let o = run(&["eval", "pochhammer", "0.2,0", "0.4,0", "-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (re, im) = parse_c(&stdout(&o));
    assert!((re - 2.0).abs() < 1e-14 && im == 0.0);
}

#[test]
fn theta_vanishes_at_p() {
    let o = run(&["eval", "theta", "0.25,0", "0.25"]);
    assert!(o.status.success());
    let (re, im) = parse_c(&stdout(&o));
    assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
}

#[test]
fn negative_complex_arguments_are_values() {
    let o = run(&["eval", "theta", "-0.3,0.2", "-0.1,-0.1", "--method", "product"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = run(&["eval", "theta", "-0.3,0.2", "-0.1,-0.1", "--method", "series"]);
    let (a, b) = (parse_c(&stdout(&o)), parse_c(&stdout(&s)));
    assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-13);
}

#[test]
fn output_has_fifteen_significant_digits() {
    let o = run(&["eval", "pq", "0.5,0.1", "0.2"]);
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2);
    let re = lines[0].split(',').next().unwrap();
    // trailing zeros are trimmed, so a 15-digit value may print shorter
    let digits = re.trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
    assert!((13..=15).contains(&digits), "{re}");
}

#[test]
fn parse_errors_exit_two_with_a_caret() {
    let o = run(&["eval", "pochhammer", "0.2,x", "0.4", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("not a number at column 5") && e.contains("  0.2,x\n      ^"), "{e}");
}

#[test]
fn evaluation_errors_exit_two() {
    let o = run(&["eval", "vwp", "0.6", "0.4", "0.1", "0.5", "0.45"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no terminating"));
}

#[test]
fn invalid_nome_is_a_config_error() {
    let o = run(&["verify", "--p", "1.5,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nome magnitude must be < 1"));
    let o = run(&["verify", "--filter", "no-such-case"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn impossible_tolerance_exits_one() {
    let o = run(&["verify", "--tol", "1e-30", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["cases"].as_array().unwrap().iter().all(|c| c["pass"] == false));
}

#[test]
fn frenkel_turaev_run_passes() {
    let o = run(&["verify", "--filter", "frenkel", "--trials", "50", "--seed", "7", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tol"], 1e-8);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 2);
    for c in cases {
        assert_eq!(c["trials"], 50);
        assert_eq!(c["pass"], true);
        let mut keys: Vec<_> = c.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["failures", "id", "max_residual", "mean_residual", "pass", "trials"]);
    }
}

#[test]
fn reports_are_byte_identical() {
    let (a, b) = (tmp("det-a.json"), tmp("det-b.json"));
    for path in [&a, &b] {
        let o = run(&["verify", "--trials", "20", "--seed", "99", "--output", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let t1 = run(&["verify", "--trials", "10", "--format", "text", "--filter", "interp"]);
    let t2 = run(&["verify", "--trials", "10", "--format", "text", "--filter", "interp"]);
    assert_eq!(t1.stdout, t2.stdout);
}

#[test]
fn every_case_is_reachable_by_its_id() {
    let o = run(&["table", "cases", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rows.len() >= 20);
    for row in rows {
        let id = row["id"].as_str().unwrap();
        let o = run(&["verify", "--filter", id, "--trials", "1"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let ids: Vec<_> = v["cases"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap().to_owned()).collect();
        assert_eq!(ids, [id]);
    }
}

#[test]
fn theta_lagrange_matches_recovery() {
    let poly = tmp("tl.json");
    let o = run(&["interpolate", "recover", "--p", "0.2,0.05", "--factors", "0.5,0.1", "-0.3,0.4", "--prefactor", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(&poly, &o.stdout).unwrap();
    let want: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let o = run(&["interpolate", "theta-lagrange", "--p", "0.2,0.05", "--degree", "2", "--poly", poly.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got: Vec<(f64, f64)> = stdout(&o).lines().map(|l| parse_c(l.split_once(' ').unwrap().1)).collect();
    assert_eq!(got.len(), 3);
    for (k, (re, im)) in got.iter().enumerate() {
        let w = &want["lambda"][k];
        let (wr, wi) = (w[0].as_f64().unwrap(), w[1].as_f64().unwrap());
        assert!((re - wr).hypot(im - wi) < 1e-9 * wr.hypot(wi).max(1.0));
    }
}

#[test]
fn wang_and_chenfu_reconstruct_the_polynomial() {
    let poly = tmp("wc.json");
    let o = run(&["interpolate", "recover", "--p", "0.15", "--factors", "0.55,0.2", "0.4,-0.3"]);
    std::fs::write(&poly, &o.stdout).unwrap();
    let p = poly.to_str().unwrap();
    let direct = parse_c(&stdout(&run(&["eval", "eaw", p, "0.6,0.25"])));
    for method in ["wang", "chenfu"] {
        let o = run(&[
            "interpolate", method, "--poly", p, "--b", "0.5", "0.6,0.3", "-0.5,0.4", "--x", "0.7,-0.1", "0.45,0.55", "--at", "0.6,0.25",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        assert_eq!(out.lines().filter(|l| l.starts_with("H[")).count(), 3);
        let last = out.lines().last().unwrap();
        let v = parse_c(last.rsplit_once(' ').unwrap().1);
        assert!((v.0 - direct.0).hypot(v.1 - direct.1) < 1e-10, "{method}: {last}");
    }
}

#[test]
fn polynomial_lagrange_and_tables() {
    let o = run(&["interpolate", "lagrange", "--nodes", "0", "1", "2", "--values", "1", "2", "5", "--at", "3", "-1"]);
    assert_eq!(stdout(&o), "f(3.0,0.0) 10.0,0.0\nf(-1.0,0.0) 2.0,0.0\n");
    let o = run(&["table", "theta", "0.3", "--from", "0.3", "--to", "1", "--steps", "3"]);
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("0.3,0.0 "));
}
