use std::process::Command;

use erwlab::cli::dispatch;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["erwlab"];
    argv.extend_from_slice(args);
    let code = dispatch(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn simulate_writes_one_row_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_erwlab"))
        .args([
            "simulate", "--d", "2", "--m", "1", "--beta", "0.5", "--steps", "1000", "--seed", "7",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1002);
    assert_eq!(text.lines().next().unwrap(), "step,x,z1,eps,novel,excited");
}

#[test]
fn girsanov_oracle_reports_a_tiny_gap() {
    let (code, out, _) = run(&[
        "oracle", "girsanov", "--d", "2", "--m", "1", "--beta0", "0", "--beta", "0.5", "--n", "4",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["max_discrepancy"].as_f64().unwrap() <= 1e-12);
    let (code, out, _) = run(&[
        "oracle", "girsanov", "--d", "2", "--m", "3", "--beta0", "1/5", "--beta", "7/10", "--n",
        "5", "--exact",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["exact"], "0/1");
}

#[test]
fn oracle_speed_and_expectation() {
    let (code, out, _) = run(&[
        "oracle", "speed", "--d", "2", "--m", "2", "--beta", "0.5", "--n", "4",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let fd = v["finite_difference"].as_f64().unwrap();
    let score = v["score_formula"].as_f64().unwrap();
    assert!((fd - score).abs() < 1e-6);
    let (code, out, _) = run(&[
        "oracle",
        "expectation",
        "--d",
        "2",
        "--beta",
        "0.5",
        "--n",
        "2",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn estimate_derivative_prints_finite_errors() {
    let (code, out, err) = run(&[
        "estimate",
        "derivative",
        "--d",
        "2",
        "--beta",
        "0.5",
        "--n",
        "20000",
        "--replicates",
        "200",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for r in results {
        assert!(r["stderr"].as_f64().unwrap().is_finite());
        assert_eq!(r["params"]["beta"], 0.5);
    }
}

#[test]
fn csv_format_and_range_scan() {
    let (code, out, _) = run(&[
        "range-scan",
        "--d",
        "3",
        "--beta-grid",
        "0,0.5",
        "--n",
        "2000",
        "--replicates",
        "50",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "observable,d,m,beta,n,count,mean,stderr,method");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("range_rate,3,inf,0,2000,50,"));
}

#[test]
fn renewal_stats_and_coupling_check() {
    let dir = tempfile::tempdir().unwrap();
    let cycles = dir.path().join("cycles.csv");
    let (code, out, err) = run(&[
        "renewal-stats",
        "--d",
        "2",
        "--beta",
        "0.8",
        "--n",
        "5000",
        "--replicates",
        "20",
        "--cycles-out",
        cycles.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["cycles"].as_u64().unwrap() > 100);
    let text = std::fs::read_to_string(&cycles).unwrap();
    assert!(text.starts_with("k,dt,dx,dn,dv\n"));

    let dump = dir.path().join("pair.csv");
    let (code, out, _) = run(&[
        "coupling-check",
        "--d",
        "4",
        "--m",
        "4",
        "--beta0",
        "0.3",
        "--beta",
        "0.5",
        "--n",
        "2000",
        "--replicates",
        "20",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("PASS"));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "step,xbar,x,z1,z2,z3,eta,xi_bar,zeta_bar,zeta,znew,excited"
    );
    assert_eq!(text.lines().count(), 2002);
}

#[test]
fn usage_errors_exit_with_two() {
    let (code, _, err) = run(&[
        "simulate", "--d", "2", "--beta", "0.5", "--steps", "10", "--out", "x.csv", "--bogus", "1",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--bogus"));
    let (code, _, err) = run(&[
        "simulate", "--d", "2", "--m", "zero", "--steps", "10", "--out", "x.csv",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--m"));
    let (code, _, err) = run(&["estimate", "speed", "--beta", "0.5", "--n", "10"]);
    assert_eq!(code, 2);
    assert!(err.contains("--d"));
    let (code, _, _) = run(&[
        "estimate", "speed", "--d", "2", "--beta", "1.5", "--n", "10",
    ]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("coupling-check"));
}

#[test]
fn runtime_errors_exit_with_three() {
    let (code, _, err) = run(&[
        "estimate",
        "speed",
        "--d",
        "2",
        "--beta",
        "0.5",
        "--n",
        "10",
        "--out-dir",
        "/nonexistent/erwlab-out",
    ]);
    assert_eq!(code, 3);
    assert!(err.contains("/nonexistent/erwlab-out"));
    let (code, _, _) = run(&[
        "oracle",
        "expectation",
        "--d",
        "16",
        "--beta",
        "0.5",
        "--n",
        "12",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"d":2,"m":1,"beta":0.2,"n":500,"replicates":10,"seed":3,"estimators":["speed"]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&[
        "estimate",
        "speed",
        "--config",
        cfg.to_str().unwrap(),
        "--beta",
        "0.7",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["beta"], 0.7);
    assert_eq!(v["config"]["replicates"], 10);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_a_function_of_argv() {
    let args = [
        "estimate",
        "speed",
        "--d",
        "3",
        "--beta",
        "0.4",
        "--n",
        "3000",
        "--replicates",
        "64",
        "--seed",
        "9",
        "--bit-exact",
    ];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
}
