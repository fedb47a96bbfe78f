//! Black-box tests of the `maxmin` binary: exit codes, artifact round-trips,
//! and byte-level reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxmin"))
}

fn tmp(test: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(test);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.code().is_some(), "binary was killed by a signal");
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn approximate_compile_eval_round_trip() {
    let dir = tmp("round_trip");
    let (s, n, t) = (dir.join("s.json"), dir.join("n.json"), dir.join("t.csv"));
    let out = run(bin()
        .args(["approximate", "--fn", "abs(x1-0.3)", "--din", "1", "--eps", "0.05"])
        .args(["--lipschitz", "1", "--out"])
        .arg(&s)
        .arg("--compile")
        .arg(&n)
        .arg("--trace")
        .arg(&t));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("length 77"), "unexpected: {text}");
    assert!(text.contains("hidden width 2"), "unexpected: {text}");

    let trace = std::fs::read_to_string(&t).unwrap();
    assert!(trace.starts_with("# config: "), "trace must echo its invocation");
    assert!(trace.lines().nth(1).unwrap().starts_with("annulus_index,r,r_prime,steps,"));
    assert_eq!(trace.lines().count(), 2 + 19, "19 annuli at eps 0.05");

    let out = run(bin().arg("eval").arg("--net").arg(&n).args(["--input", "0.9"]));
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.6).abs() <= 1e-9, "|0.9 - 0.3| should be 0.6, got {v}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tmp("reproducible");
    let s = dir.join("s.json");
    let n = dir.join("n.json");
    let mut artifacts = Vec::new();
    for _ in 0..2 {
        let out = run(bin()
            .args(["approximate", "--fn", "sin(x1)+0.5*cos(2*x2)", "--din", "2"])
            .args(["--eps", "0.6", "--estimate-modulus", "--seed", "3", "--out"])
            .arg(&s)
            .arg("--compile")
            .arg(&n));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        artifacts.push((std::fs::read(&s).unwrap(), std::fs::read(&n).unwrap()));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "string artifacts differ between runs");
    assert_eq!(artifacts[0].1, artifacts[1].1, "net artifacts differ between runs");
}

#[test]
fn verify_reports_pass_and_fail() {
    let dir = tmp("verify_codes");
    let n = dir.join("n.json");
    run(bin()
        .args(["approximate", "--fn", "abs(x1-0.3)", "--din", "1", "--eps", "0.05"])
        .args(["--lipschitz", "1", "--out"])
        .arg(dir.join("s.json"))
        .arg("--compile")
        .arg(&n));

    let errs = dir.join("errs.csv");
    let out = run(bin()
        .arg("verify")
        .arg("--net")
        .arg(&n)
        .args(["--fn", "abs(x1-0.3)", "--eps", "0.05", "--lipschitz", "1", "--out"])
        .arg(&errs));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: PASS"));
    let csv = std::fs::read_to_string(&errs).unwrap();
    assert!(csv.starts_with("# config: "));
    assert_eq!(csv.lines().count(), 2 + 10_000, "default 1D grid is 10^4 points");

    // Same net against the wrong target: the sup error is ~0.2.
    let out = run(bin()
        .arg("verify")
        .arg("--net")
        .arg(&n)
        .args(["--fn", "abs(x1-0.5)", "--eps", "0.05"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: FAIL"));
}

#[test]
fn analyze_rejects_wide_nets_and_certifies_narrow_ones() {
    let dir = tmp("analyze");
    let wide = dir.join("wide.json");
    run(bin()
        .args(["approximate", "--fn", "abs(x1-0.3)", "--din", "1", "--eps", "0.2"])
        .args(["--lipschitz", "1", "--out"])
        .arg(dir.join("s.json"))
        .arg("--compile")
        .arg(&wide));
    // Hidden width 2 on a 1-input net is out of the analyzer's scope.
    let out = run(bin().arg("analyze").arg("--net").arg(&wide));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of scope"));

    let narrow = dir.join("narrow.json");
    std::fs::write(
        &narrow,
        r#"{
            "version": 1, "d_in": 2, "d_out": 1,
            "layers": [
                { "W": [[1.0, 0.0], [0.0, 1.0]], "b": [2.0, 2.0] },
                { "W": [[0.6, 0.4]], "b": [-1.0] }
            ]
        }"#,
    )
    .unwrap();
    let cert_path = dir.join("cert.json");
    let out = run(bin()
        .arg("analyze")
        .arg("--net")
        .arg(&narrow)
        .args(["--din", "2", "--out"])
        .arg(&cert_path));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("case: 1"), "unexpected: {text}");
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert_eq!(cert["case"], 1);
    assert!(cert["bound"].as_f64().unwrap() >= 1.0 / 16.0);
    assert!(cert["witness"].is_null());
}

#[test]
fn report_emits_rows_and_slope() {
    let dir = tmp("report");
    let csv_path = dir.join("depth.csv");
    let out = run(bin()
        .args(["report", "--sweep", "0.2,0.1,0.05", "--fn", "abs(x1-0.3)"])
        .args(["--din", "1", "--lipschitz", "1", "--out"])
        .arg(&csv_path));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    let slope: f64 = lines[1].strip_prefix("# slope: ").unwrap().parse().unwrap();
    assert!(slope > 0.5 && slope <= 1.5, "slope {slope}");
    assert_eq!(lines[2], "eps,w,radius,length,predicted");
    let lengths: Vec<&str> =
        lines[3..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(lengths, ["17", "37", "77"]);
}

#[test]
fn interpolate_compiles_and_recovers_values() {
    let dir = tmp("interpolate");
    let pts = dir.join("pts.csv");
    std::fs::write(&pts, "0.1,0.2,1.5\n0.8,0.3,-0.5\n# comment\n0.4,0.9,0.25\n").unwrap();
    let (s, n) = (dir.join("s.json"), dir.join("n.json"));
    let out = run(bin()
        .arg("interpolate")
        .arg("--points")
        .arg(&pts)
        .args(["--din", "2", "--out"])
        .arg(&s)
        .arg("--compile")
        .arg(&n));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("length 5 through 3 points"));
    for (x, want) in [("0.1,0.2", 1.5), ("0.8,0.3", -0.5), ("0.4,0.9", 0.25)] {
        let out = run(bin().arg("eval").arg("--net").arg(&n).args(["--input", x]));
        let got: f64 = stdout(&out).trim().parse().unwrap();
        assert!((got - want).abs() <= 1e-8, "at ({x}): {got} vs {want}");
    }
}

#[test]
fn usage_and_data_errors_exit_two() {
    let dir = tmp("usage");
    // No modulus flag.
    let out = run(bin()
        .args(["approximate", "--fn", "x1", "--din", "1", "--eps", "0.1", "--out"])
        .arg(dir.join("a.json")));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modulus"));

    // Two modulus flags: rejected by the argument parser.
    let out = run(bin()
        .args(["approximate", "--fn", "x1", "--din", "1", "--eps", "0.1"])
        .args(["--lipschitz", "1", "--hoelder", "1:0.5", "--out"])
        .arg(dir.join("b.json")));
    assert_eq!(out.status.code(), Some(2));

    // Malformed domain.
    let out = run(bin()
        .args(["approximate", "--fn", "x1", "--din", "1", "--eps", "0.1"])
        .args(["--lipschitz", "1", "--domain", "cube:0..1", "--out"])
        .arg(dir.join("c.json")));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad domain"));

    // --dout disagreeing with the expression list.
    let out = run(bin()
        .args(["approximate", "--fn", "x1,2*x1", "--din", "1", "--dout", "3"])
        .args(["--eps", "0.1", "--lipschitz", "2", "--out"])
        .arg(dir.join("d.json")));
    assert_eq!(out.status.code(), Some(2));

    // Evaluating a net at a point of the wrong dimension.
    let n = dir.join("n.json");
    run(bin()
        .args(["approximate", "--fn", "x1", "--din", "1", "--eps", "0.1"])
        .args(["--lipschitz", "1", "--out"])
        .arg(dir.join("s.json"))
        .arg("--compile")
        .arg(&n));
    let out = run(bin().arg("eval").arg("--net").arg(&n).args(["--input", "0.5,0.5"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_finite_forward_exits_three() {
    let dir = tmp("nonfinite");
    let net = dir.join("overflow.json");
    std::fs::write(
        &net,
        r#"{
            "version": 1, "d_in": 1, "d_out": 1,
            "layers": [
                { "W": [[1e308]], "b": [1e308] },
                { "W": [[1e308]], "b": [0.0] }
            ]
        }"#,
    )
    .unwrap();
    let out = run(bin().arg("eval").arg("--net").arg(&net).args(["--input", "1"]));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn constant_target_compiles_to_depth_one() {
    let dir = tmp("constant");
    let n = dir.join("n.json");
    // With an estimated modulus the sampled oscillation is zero, one piece
    // spans the whole ball, and the net needs no hidden layer.
    let out = run(bin()
        .args(["approximate", "--fn", "0.5", "--din", "1", "--eps", "0.1"])
        .args(["--estimate-modulus", "--out"])
        .arg(dir.join("s.json"))
        .arg("--compile")
        .arg(&n));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("depth 1"));
    let net: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&n).unwrap()).unwrap();
    assert_eq!(net["layers"].as_array().unwrap().len(), 1);
    let out = run(bin().arg("eval").arg("--net").arg(&n).args(["--input", "0.7"]));
    let got: f64 = stdout(&out).trim().parse().unwrap();
    assert_eq!(got, 0.5);
}
