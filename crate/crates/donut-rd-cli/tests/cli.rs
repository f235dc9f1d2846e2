//! End-to-end tests of the `donut-rd` binary: ingestion, exit codes,
//! report schemas, and simulation output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_donut-rd"))
}

fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().expect("process terminated by signal"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn json(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).expect("stdout is one JSON document")
}

/// Piecewise-linear outcomes with slope 3 on both sides and a unit jump.
fn jump_csv() -> String {
    let mut body = String::from("x,y\n");
    for i in 0..12 {
        let x = -0.95 + 1.9 * i as f64 / 11.0;
        let y = 2.0 + 3.0 * x + if x >= 0.0 { 1.0 } else { 0.0 };
        body.push_str(&format!("{x},{y}\n"));
    }
    body
}

#[test]
fn estimate_recovers_a_clean_jump_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "jump.csv", &jump_csv());
    let (code, out, _) = run(bin().args([
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--M",
        "2",
    ]));
    assert_eq!(code, 0);
    let report = json(&out);
    let tau = report["tau_hat"].as_f64().unwrap();
    assert!((tau - 1.0).abs() < 1e-9, "tau_hat = {tau}");
    let lower = report["ci_lower"].as_f64().unwrap();
    let upper = report["ci_upper"].as_f64().unwrap();
    assert!((0.5 * (lower + upper) - tau).abs() < 1e-12);
    // The full effective configuration is echoed.
    for key in [
        "h_used", "d", "kernel", "M", "alpha", "cutoff", "nn_j", "data", "b_bar", "s_hat", "cv",
        "bias_ratio", "eff_n_plus", "eff_n_minus",
    ] {
        assert!(report.get(key).is_some(), "report is missing {key}");
    }
}

#[test]
fn zero_smoothness_bound_gives_the_unadjusted_normal_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "jump.csv", &jump_csv());
    let (code, out, _) = run(bin().args([
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--M",
        "0",
        "--h",
        "0.9",
    ]));
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["b_bar"].as_f64().unwrap(), 0.0);
    let cv = report["cv"].as_f64().unwrap();
    assert!((cv - 1.9599639845400542).abs() < 1e-10);
    let half = 0.5
        * (report["ci_upper"].as_f64().unwrap() - report["ci_lower"].as_f64().unwrap());
    let s_hat = report["s_hat"].as_f64().unwrap();
    assert!((half - cv * s_hat).abs() < 1e-12);
}

#[test]
fn cutoff_is_subtracted_before_estimation() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_file(dir.path(), "raw.csv", &jump_csv());
    let shifted_body: String = {
        let mut body = String::from("x,y\n");
        for line in jump_csv().lines().skip(1) {
            let (x, y) = line.split_once(',').unwrap();
            let x: f64 = x.parse().unwrap();
            body.push_str(&format!("{},{y}\n", x + 1500.0));
        }
        body
    };
    let shifted = write_file(dir.path(), "shifted.csv", &shifted_body);

    let (_, out_raw, _) = run(bin().args([
        "estimate",
        "--data",
        raw.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.9",
    ]));
    let (code, out_shifted, _) = run(bin().args([
        "estimate",
        "--data",
        shifted.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.9",
        "--cutoff",
        "1500",
    ]));
    assert_eq!(code, 0);
    let tau_raw = json(&out_raw)["tau_hat"].as_f64().unwrap();
    let tau_shifted = json(&out_shifted)["tau_hat"].as_f64().unwrap();
    assert!(
        (tau_raw - tau_shifted).abs() < 1e-9,
        "{tau_raw} vs {tau_shifted}"
    );
}

#[test]
fn weight_column_is_ignored_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("x,y,weight\n");
    for line in jump_csv().lines().skip(1) {
        body.push_str(&format!("{line},3.5\n"));
    }
    let with_weight = write_file(dir.path(), "weighted.csv", &body);
    let plain = write_file(dir.path(), "plain.csv", &jump_csv());

    let (code, out_w, err_w) = run(bin().args([
        "estimate",
        "--data",
        with_weight.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.9",
    ]));
    assert_eq!(code, 0);
    assert!(err_w.contains("'weight' is ignored"), "stderr: {err_w}");
    let (_, out_p, err_p) = run(bin().args([
        "estimate",
        "--data",
        plain.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.9",
    ]));
    assert!(!err_p.contains("weight"));
    assert_eq!(
        json(&out_w)["tau_hat"].as_f64().unwrap(),
        json(&out_p)["tau_hat"].as_f64().unwrap()
    );
}

#[test]
fn schema_errors_exit_2_and_cite_the_problem() {
    let dir = tempfile::tempdir().unwrap();

    // Missing y column.
    let no_y = write_file(dir.path(), "no_y.csv", "x,z\n1,2\n2,3\n3,4\n-1,5\n");
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        no_y.to_str().unwrap(),
        "--M",
        "2",
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("'y'"), "stderr: {err}");

    // Blank y in the 6th data row = file line 7.
    let blank = write_file(
        dir.path(),
        "blank.csv",
        "x,y\n-0.4,1\n-0.3,1\n-0.2,1\n-0.1,1\n0.1,2\n0.2,\n0.3,2\n",
    );
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        blank.to_str().unwrap(),
        "--M",
        "2",
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("row 7"), "stderr: {err}");
    assert!(err.contains("'y'"), "stderr: {err}");

    // Non-finite value.
    let nan = write_file(
        dir.path(),
        "nan.csv",
        "x,y\n-0.4,1\n-0.3,nan\n-0.2,1\n0.1,2\n0.2,2\n",
    );
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        nan.to_str().unwrap(),
        "--M",
        "2",
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("row 3"), "stderr: {err}");

    // Fewer than 4 valid rows.
    let short = write_file(dir.path(), "short.csv", "x,y\n-0.4,1\n-0.3,1\n0.3,2\n");
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        short.to_str().unwrap(),
        "--M",
        "2",
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("4"), "stderr: {err}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "jump.csv", &jump_csv());

    // d >= h names the constraint.
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.05",
        "--donut",
        "0.1",
    ]));
    assert_eq!(code, 2);
    assert!(
        err.contains("smaller than the bandwidth"),
        "stderr: {err}"
    );

    // Missing required --M is a usage error.
    let (code, _, _) = run(bin().args(["estimate", "--data", data.to_str().unwrap()]));
    assert_eq!(code, 2);

    // Negative M.
    let (code, _, _) = run(bin().args([
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--M",
        "-1",
        "--h",
        "0.5",
    ]));
    assert_eq!(code, 2);
}

#[test]
fn io_errors_exit_4() {
    let (code, _, err) = run(bin().args([
        "estimate",
        "--data",
        "/nonexistent/path/data.csv",
        "--M",
        "2",
    ]));
    assert_eq!(code, 4);
    assert!(err.contains("cannot read"), "stderr: {err}");
}

#[test]
fn degenerate_tests_exit_3_with_the_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "jump.csv", &jump_csv());

    let (code, _, err) = run(bin().args([
        "test",
        "--data",
        data.to_str().unwrap(),
        "--M",
        "2",
        "--donut",
        "0",
        "--method",
        "delta",
    ]));
    assert_eq!(code, 3);
    assert!(err.contains("degenerate-test"), "stderr: {err}");

    // One observation inside the donut per side starves the inner fit.
    let mut body = String::from("x,y\n");
    for x in [-0.7, -0.6, -0.5, -0.4, -0.3, -0.1, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7] {
        body.push_str(&format!("{x},{}\n", 2.0 * x));
    }
    let sparse = write_file(dir.path(), "sparse.csv", &body);
    let (code, _, err) = run(bin().args([
        "test",
        "--data",
        sparse.to_str().unwrap(),
        "--M",
        "2",
        "--h",
        "0.8",
        "--donut",
        "0.2",
        "--method",
        "gamma",
    ]));
    assert_eq!(code, 3);
    assert!(
        err.contains("insufficient-inner-support"),
        "stderr: {err}"
    );
}

#[test]
fn test_reports_echo_config_and_satisfy_the_decision_rule() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_file(dir.path(), "jump.csv", &jump_csv());
    for method in ["delta", "gamma"] {
        let (code, out, _) = run(bin().args([
            "test",
            "--data",
            data.to_str().unwrap(),
            "--M",
            "2",
            "--h",
            "0.9",
            "--donut",
            "0.3",
            "--method",
            method,
        ]));
        assert_eq!(code, 0);
        let report = json(&out);
        assert_eq!(report["config"]["method"].as_str().unwrap(), method);
        assert_eq!(report["result"]["method"].as_str().unwrap(), method);
        let statistic = report["result"]["statistic"].as_f64().unwrap();
        let cv = report["result"]["cv"].as_f64().unwrap();
        let reject = report["result"]["reject"].as_bool().unwrap();
        assert_eq!(reject, statistic.abs() > cv);
        let p = report["result"]["p_upper"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn constants_single_point_matches_closed_forms() {
    let (code, out, _) = run(bin().args([
        "constants",
        "--kernel",
        "uniform",
        "--c-from",
        "0",
        "--c-to",
        "0",
        "--c-steps",
        "1",
    ]));
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "c,B,S,S_tilde,B_ratio,S_ratio,ci_length_ratio"
    );
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - (-1.0 / 6.0)).abs() < 1e-10);
    assert!((row[2] - 4.0).abs() < 1e-10);
    assert!((row[3] - 4.0).abs() < 1e-10);
    assert_eq!(row[4], 1.0);
    assert_eq!(row[5], 1.0);
    assert_eq!(row[6], 1.0);
}

#[test]
fn constants_rejects_bad_grids() {
    let (code, _, _) = run(bin().args(["constants", "--c-to", "1.0"]));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().args(["constants", "--c-from", "0.4", "--c-to", "0.2"]));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().args(["constants", "--c-steps", "0"]));
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_deterministic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(
        dir.path(),
        "config.json",
        r#"{"l_grid": [0, 40], "dgp": {"n": 200}}"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let (code, _, _) = run(bin().args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--reps",
            "25",
            "--seed",
            "11",
            "--out-dir",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
    }
    for name in ["table1.csv", "table2.csv", "table3.csv", "manifest.json"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let table3 = std::fs::read_to_string(out_a.join("table3.csv")).unwrap();
    assert_eq!(table3.lines().next().unwrap(), "L,delta_reject,gamma_reject");
    assert_eq!(table3.lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"].as_u64().unwrap(), 11);
    assert_eq!(manifest["generator"].as_str().unwrap(), "chacha8");
    assert_eq!(manifest["reps"].as_u64().unwrap(), 25);
    assert!(manifest["version"].as_str().is_some());
    assert_eq!(manifest["dgp"]["n"].as_u64().unwrap(), 200);
}

#[test]
fn simulate_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(
        dir.path(),
        "config.json",
        r#"{"l_grid": [0], "dgp": {"n": 200, "sigma": 1.0}}"#,
    );
    let (code, _, err) = run(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--reps",
        "5",
        "--seed",
        "1",
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("sigma"), "stderr: {err}");
}

#[test]
fn simulate_rejects_invalid_rd_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(bin()
        .env("RD_THREADS", "zero")
        .args([
            "simulate",
            "--reps",
            "5",
            "--seed",
            "1",
            "--out-dir",
            dir.path().join("out").to_str().unwrap(),
        ]));
    assert_eq!(code, 2);
    assert!(err.contains("RD_THREADS"), "stderr: {err}");
}
