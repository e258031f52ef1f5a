use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl-lab")).args(args).env("DUNKL_THREADS", "1").output().expect("spawn dunkl-lab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dunkl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_NORMS: &str = "[time_grid]\npoints = 12\n[space_grid]\nlinear = 24\ndyadic = 8\n";

#[test]
fn kernels_suite_passes() {
    let o = lab(&["verify", "--suite", "kernels", "--k", "1", "--tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("check,value,bound,pass\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn impossible_tolerance_fails_with_one() {
    let o = lab(&["verify", "--suite", "semigroup", "--tol", "1e-300"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let bad = scratch("bad.toml", "k = [1.0]\n[space_grid]\nlinear = 8\nwidth = 2\n");
    let o = lab(&["norms", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("line 4") && e.contains("width"), "{e}");

    for args in [
        &["norms", "--beta", ""][..],
        &["norms", "--beta"][..],
        &["norms", "--beta", "0.5,x"][..],
        &["verify", "--suite", "everything"][..],
        &["calculus", "--generators", "hilbert"][..],
        &["calculus", "--format", "xml"][..],
        &["norms", "--config", "/nonexistent/dunkl.toml"][..],
        &["frobnicate"][..],
    ] {
        let o = lab(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn empty_beta_names_the_field() {
    let o = lab(&["norms", "--beta", ""]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("beta"));
}

#[test]
fn calculus_is_deterministic() {
    let a = lab(&["calculus"]);
    let b = lab(&["calculus"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = String::from_utf8(a.stdout).unwrap();
    assert!(out.starts_with("generator_id,operation,parameter,value,error_estimate\n"));
    for g in ["diag", "jordan", "nonnormal"] {
        assert!(out.contains(&format!("{g},")), "{g}");
    }
}

#[test]
fn generators_filter_and_json() {
    let o = lab(&["calculus", "--generators", "diag", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        let g = r["generator_id"].as_str().unwrap();
        assert!(g == "diag" || g == "scalar", "{g}");
    }
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("calc.csv", "");
    let o = lab(&["calculus", "--generators", "jordan", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 5);
}

#[test]
fn norms_report_small_grid() {
    let cfg = scratch("small.toml", SMALL_NORMS);
    let o = lab(&["norms", "--config", cfg.to_str().unwrap(), "--beta", "0.3,0.6", "--k", "0,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    for col in ["function", "k", "beta", "estimator", "value", "m", "t_min", "t_max", "grid_points", "flag"] {
        assert!(header.iter().any(|h| h == col), "{col}");
    }
    let idx = |c: &str| header.iter().position(|h| h == c).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let num = |r: &csv::StringRecord, c: &str| r[idx(c)].parse::<f64>().unwrap();
    for beta in [0.3, 0.6] {
        for k in [0.0, 1.0] {
            let mut fns: Vec<&str> = rows.iter().filter(|r| num(r, "beta") == beta && num(r, "k") == k).map(|r| &r[idx("function")]).collect();
            fns.sort();
            fns.dedup();
            assert!(fns.len() >= 3, "beta={beta} k={k}: {fns:?}");
        }
    }
    let ratios: Vec<_> = rows.iter().filter(|r| num(r, "k") == 0.0 && r[idx("estimator")].contains('/')).collect();
    assert!(!ratios.is_empty());
    assert!(ratios.iter().all(|r| &r[idx("flag")] == "ok"));
}
