//! End-to-end checks of the binary: exit codes, cache behaviour, overrides.

use std::path::PathBuf;
use std::process::Command;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_rifs")).args(args).output().expect("runs");
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn validate_pass_and_fail_exit_codes() {
    let (stdout, _, code) = run(&["validate", config_path("random_cantor.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("USSC: pass"));

    // the overlapping base-3 system fails the spectrum-mode checks...
    let (stdout, _, code) = run(&["validate", config_path("sec61.json").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("USSC: fail (inconclusive)"));
    assert!(stdout.contains("regular: yes"));
    assert!(stdout.contains("hull [0,1]: pass"));

    // ... and passes the finite-type ones
    let (stdout, _, code) = run(&[
        "validate",
        config_path("sec61.json").to_str().unwrap(),
        "--mode",
        "finite-type",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("result: PASS"));
}

#[test]
fn budget_errors_exit_with_two() {
    let (_, stderr, code) = run(&[
        "enumerate",
        config_path("sec63.json").to_str().unwrap(),
        "--cap",
        "10",
    ]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("not finite type up to cap"));
}

#[test]
fn enumerate_cache_roundtrip_and_corruption() {
    let tmp = std::env::temp_dir().join(format!("rifs-cli-cache-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    let cache = tmp.join("cache");
    let cfg = config_path("sec61.json");
    let cfg = cfg.to_str().unwrap();

    let (stdout, _, code) = run(&["enumerate", cfg, "--cache-dir", cache.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("cache: saved"), "stdout: {stdout}");

    let (stdout, _, code) = run(&["enumerate", cfg, "--cache-dir", cache.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("cache: hit"), "stdout: {stdout}");
    assert!(stdout.contains("reduced characteristic vectors: 5"));

    // corrupt the cache file: the checksum mismatch forces a rebuild
    let entry = std::fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let text = std::fs::read_to_string(&entry).unwrap().replace("\"1/6\"", "\"1/5\"");
    std::fs::write(&entry, text).unwrap();
    let (stdout, _, code) = run(&["enumerate", cfg, "--cache-dir", cache.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("cache: saved"), "rebuild after corruption: {stdout}");

    let _ = std::fs::remove_dir_all(&tmp);
}

#[test]
fn theta_override_changes_interval_endpoint() {
    let cfg = config_path("sec61.json");
    let cfg = cfg.to_str().unwrap();
    let (half, _, code) = run(&["commuting", cfg, "--theta", "1/2,1/2"]);
    assert_eq!(code, 0);
    assert!(half.contains("[0.500000000000, 1.630929753571]"), "{half}");
    let (third, _, code) = run(&["commuting", cfg, "--theta", "1/3,2/3"]);
    assert_eq!(code, 0);
    // lo = (log(3/4)/3 + log 2)/log 3
    let target = ((3f64 / 4.0).ln() / 3.0 + 2f64.ln()) / 3f64.ln();
    assert!(
        third.contains(&format!("[{target:.12}")),
        "expected lo {target:.12} in: {third}"
    );
}

#[test]
fn spectrum_csv_has_expected_shape() {
    let (stdout, _, code) = run(&[
        "spectrum",
        config_path("random_cantor.json").to_str().unwrap(),
        "--q-min",
        "0",
        "--q-max",
        "1",
        "--q-step",
        "0.5",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "q,beta,alpha,f,residual");
    assert_eq!(lines.len(), 4); // header + q = 0, 0.5, 1
    let q1: Vec<&str> = lines[3].split(',').collect();
    let beta_at_1: f64 = q1[1].parse().unwrap();
    assert!(beta_at_1.abs() < 1e-12);
}

#[test]
fn simulate_local_dim_at_zero() {
    let (stdout, _, code) = run(&[
        "simulate",
        config_path("sec61.json").to_str().unwrap(),
        "--depth",
        "20",
        "--x",
        "0",
        "--levels",
        "20",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("empirical local dimension at x = 0"));
}

#[test]
fn golden_config_runs_enumerate() {
    let (stdout, _, code) = run(&[
        "enumerate",
        config_path("golden_bernoulli.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("reduced characteristic vectors: 6"), "{stdout}");
}

#[test]
fn pooled_check_reports_finite_type() {
    let (stdout, _, code) = run(&[
        "enumerate",
        config_path("sec63.json").to_str().unwrap(),
        "--pooled",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("finite type"), "{stdout}");
}

#[test]
fn liveness_flag_reports_witnesses() {
    let (stdout, _, code) = run(&[
        "enumerate",
        config_path("sec61.json").to_str().unwrap(),
        "--validate-liveness",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("liveness: every class is hit by a deep cylinder"), "{stdout}");
}
