use std::process::{Command, Output};

fn rcbound(args: &[&str]) -> Output {
    rcbound_env(args, &[])
}

fn rcbound_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rcbound"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv_rows(o: &Output) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|x| x.unwrap()).collect()
}

fn csv_field(o: &Output, row: usize, column: &str) -> String {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let idx = r.headers().unwrap().iter().position(|h| h == column).expect("column");
    r.records().nth(row).unwrap().unwrap()[idx].to_string()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn bound_anchors() {
    let o = rcbound(&["bound", "--channel", "bec", "--delta", "1.0", "--n", "4", "--log2m", "2", "--method", "rc"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_field(&o, 0, "epsilon").parse::<f64>().unwrap(), 0.75);

    let o = rcbound(&["bound", "--channel", "bsc", "--delta", "0.1", "--n", "1", "--log2m", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rows = json_lines(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["schema_version"], 1);
    assert!((rows[0]["epsilon"].as_f64().unwrap() - 0.3).abs() <= 1e-12);

    // --rate is log2 M / n.
    let o = rcbound(&["bound", "--channel", "bec", "--delta", "1.0", "--n", "4", "--rate", "0.5"]);
    assert_eq!(csv_field(&o, 0, "log2_m"), "2.0");
}

#[test]
fn gaussian_value_lies_in_its_sandwich() {
    let eps = |method: &str| {
        let o = rcbound(&["bound", "--channel", "awgn", "--gamma", "1", "--n", "8", "--log2m", "4", "--method", method]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let e: f64 = csv_field(&o, 0, "epsilon").parse().unwrap();
        let err: f64 = csv_field(&o, 0, "err_est").parse().unwrap();
        (e, err)
    };
    let (lo, lo_err) = eps("awgn-lower");
    let (ex, ex_err) = eps("rc");
    let (up, up_err) = eps("awgn-upper");
    assert!(lo <= ex + lo_err + ex_err && ex <= up + ex_err + up_err, "{lo} {ex} {up}");
}

#[test]
fn column_order_is_stable() {
    let o = rcbound(&["bound", "--channel", "bec", "--delta", "0.5", "--n", "2", "--log2m", "1"]);
    let head = String::from_utf8_lossy(&o.stdout).lines().next().unwrap().to_string();
    assert_eq!(head, "channel,delta_or_gamma,n,log2_m,method,epsilon,ln_epsilon,err_est,flags");
    let o = rcbound(&["sweep", "--channel", "bec", "--delta", "1", "--epsilon", "0.5", "--n-grid", "2"]);
    let head = String::from_utf8_lossy(&o.stdout).lines().next().unwrap().to_string();
    assert_eq!(
        head,
        "channel,delta_or_gamma,n,epsilon_target,method,rate,log2_m,achieved_epsilon,err_est,flags,error"
    );
}

#[test]
fn domain_and_usage_errors_exit_two() {
    for args in [
        &["bound", "--channel", "bsc", "--delta", "0.7", "--n", "4", "--log2m", "1"][..],
        &["bound", "--channel", "bsc", "--gamma", "1", "--n", "4", "--log2m", "1"],
        &["bound", "--channel", "awgn", "--gamma", "1", "--n", "4", "--log2m", "1", "--method", "bec-dt"],
        &["bound", "--channel", "bsc", "--delta", "0.1", "--n", "4"],
        &["bound", "--channel", "bsc", "--delta", "0.1", "--n", "4", "--log2m", "1", "--method", "nope"],
        &["sweep", "--channel", "bec", "--delta", "0.5", "--epsilon", "2", "--n-grid", "4"],
        &["sweep", "--channel", "bec", "--delta", "0.5", "--epsilon", "0.1", "--n-grid", "8:4:1"],
    ] {
        let o = rcbound(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_flags_exit_three_with_data() {
    let o = rcbound(&["bound", "--channel", "awgn", "--gamma", "1", "--n", "8", "--log2m", "4", "--max-depth", "1"]);
    assert_eq!(code(&o), 3);
    assert_eq!(csv_field(&o, 0, "flags"), "depth-exceeded");
}

#[test]
fn sweep_single_point_and_grids() {
    let o = rcbound(&["sweep", "--channel", "bec", "--delta", "1", "--epsilon", "0.5", "--n-grid", "2,4"]);
    assert_eq!(code(&o), 0);
    let rates: Vec<f64> = csv_rows(&o).iter().map(|r| r[5].parse().unwrap()).collect();
    assert!((rates[0] - 0.5).abs() <= 1e-6 && (rates[1] - 0.25).abs() <= 1e-6, "{rates:?}");

    let o = rcbound(&[
        "sweep", "--channel", "bec", "--delta", "0.5", "--epsilon", "1e-2", "--n-grid", "10:30:10", "--methods",
        "rc,bec-rcu,bec-converse", "--format", "json",
    ]);
    let rows = json_lines(&o);
    let cells: Vec<(u64, &str)> = rows.iter().map(|r| (r["n"].as_u64().unwrap(), r["method"].as_str().unwrap())).collect();
    assert_eq!(cells.len(), 9);
    assert_eq!(cells[0], (10, "rc"));
    assert_eq!(cells[4], (20, "bec-rcu"));
    assert_eq!(cells[8], (30, "bec-converse"));
    for cell in rows.chunks(3) {
        let r: Vec<f64> = cell.iter().map(|x| x["rate"].as_f64().unwrap()).collect();
        assert!(r[0] >= r[1] && r[0] <= r[2], "{r:?}");
    }
}

#[test]
fn output_is_identical_across_job_counts() {
    let args = |jobs: &'static str| {
        [
            "sweep", "--channel", "bsc", "--delta", "0.11", "--epsilon", "1e-3", "--n-grid", "16:96:16", "--methods", "rc",
            "--jobs", jobs,
        ]
    };
    let a = rcbound(&args("1"));
    let b = rcbound(&args("4"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_and_environment_overrides() {
    let dir = std::env::temp_dir().join(format!("rcbound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.jsonl");
    let o = rcbound_env(
        &["bound", "--channel", "bec", "--delta", "0.5", "--n", "2", "--log2m", "1", "--out", path.to_str().unwrap()],
        &[("RCBOUND_FORMAT", "json")],
    );
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let row: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert!((row["epsilon"].as_f64().unwrap() - 0.28125).abs() <= 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();

    let args = ["bound", "--channel", "awgn", "--gamma", "1", "--n", "8", "--log2m", "4"];
    assert_eq!(code(&rcbound_env(&args, &[("RCBOUND_REL_TOL", "-1")])), 2);
    // An explicit flag beats the environment.
    assert_eq!(code(&rcbound_env(&[&args[..], &["--rel-tol", "1e-8"]].concat(), &[("RCBOUND_REL_TOL", "-1")])), 0);
    assert_eq!(code(&rcbound_env(&args, &[("RCBOUND_MAX_DEPTH", "1")])), 3);
}

#[test]
fn validate_suites() {
    let o = rcbound(&["validate", "--suite", "kernel"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    // The check name holds commas, so it must come back intact through quoting.
    assert!(rows[0][1].contains("(w, z, M)"));
    assert_eq!(&rows[0][6], "pass");

    let o = rcbound(&["validate", "--suite", "bec", "--trials", "1000000", "--seed", "7", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json_lines(&o);
    assert!(rows.iter().all(|r| r["status"] == "pass" && r["schema_version"] == 1));
    assert!(rows.iter().any(|r| r["trials"] == 1_000_000));

    let again = rcbound(&["validate", "--suite", "bec", "--trials", "1000000", "--seed", "7", "--format", "json"]);
    assert_eq!(o.stdout, again.stdout);

    assert_eq!(code(&rcbound(&["validate", "--suite", "bsc", "--trials", "0"])), 2);
}

#[test]
fn validate_all_passes_by_default() {
    let o = rcbound(&["validate", "--suite", "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&o).len(), 17);
}
