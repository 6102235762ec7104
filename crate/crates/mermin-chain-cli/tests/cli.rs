//! End-to-end tests against the compiled binary: exit codes, output shape,
//! and byte-level determinism.

use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mermin-chain"))
}

#[test]
fn coeffs_prints_ground_truth_table() {
    let output = binary().args(["coeffs", "--n", "3"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("\"v\":\"100\""));
    assert!(stdout.contains("5.00000000000000e-1"));
    assert!(stdout.contains("-5.00000000000000e-1"));
}

#[test]
fn coeffs_rejects_zero_parties() {
    let output = binary().args(["coeffs", "--n", "0"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn coeffs_csv_has_header() {
    let output = binary()
        .args(["coeffs", "--n", "2", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("v,c,c_prime\n"));
    assert_eq!(stdout.lines().count(), 5);
}

#[test]
fn simulate_rejects_undersized_double_chain() {
    let output = binary()
        .args(["simulate", "--scenario", "ghz-double", "--n", "3", "--K", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
}

#[test]
fn simulate_reports_unsatisfied_point() {
    // θ = 0 evaluates fine but cannot violate; the report must still print.
    let output = binary()
        .args([
            "simulate",
            "--scenario",
            "w-single",
            "--n",
            "3",
            "--K",
            "1",
            "--theta",
            "0.0",
            "--gamma",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("\"violated\":false"));
}

#[test]
fn simulate_auto_window_succeeds_and_is_deterministic() {
    let run = || {
        binary()
            .args([
                "simulate",
                "--scenario",
                "ghz-single",
                "--n",
                "3",
                "--K",
                "4",
                "--theta",
                "auto",
            ])
            .output()
            .unwrap()
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0));
    let stdout = String::from_utf8(first.stdout.clone()).unwrap();
    assert!(stdout.contains("\"all_violated\":true"));
    let second = run();
    assert_eq!(first.stdout, second.stdout, "output must be byte-identical");
}

#[test]
fn simulate_csv_report_columns() {
    let output = binary()
        .args([
            "simulate",
            "--scenario",
            "ghz-single",
            "--n",
            "3",
            "--K",
            "2",
            "--theta",
            "auto",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with(
        "scenario,n,K,theta,epsilon,k,gamma_k,P_k,I_analytic,I_bruteforce,violated\n"
    ));
    assert_eq!(stdout.lines().count(), 3);
}

#[test]
fn verify_passes_on_seeded_grid() {
    let output = binary()
        .args([
            "verify", "--scenario", "w-single", "--n", "3", "--K", "5", "--samples", "50",
            "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("n=3 max_residual="));
    assert!(stdout.contains("overall max_residual="));
}

#[test]
fn verify_accepts_n_ranges() {
    let output = binary()
        .args([
            "verify",
            "--scenario",
            "ghz-single",
            "--n",
            "3..5",
            "--K",
            "2",
            "--samples",
            "5",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    for n in 3..=5 {
        assert!(stdout.contains(&format!("n={n} max_residual=")));
    }
}

#[test]
fn certify_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let output = binary()
        .args([
            "certify",
            "--scenario",
            "ghz-single",
            "--n",
            "4",
            "--K",
            "3",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let body = std::fs::read_to_string(&path).unwrap();
    assert!(body.contains("\"all_violated\":true"));
    assert!(body.contains("\"max_residual\":"));
    assert!(body.contains("\"config\":"));
    assert!(body.contains("\"report\":"));
}

#[test]
fn certify_unwritable_path_is_an_io_error() {
    let output = binary()
        .args([
            "certify",
            "--scenario",
            "ghz-single",
            "--n",
            "3",
            "--K",
            "1",
            "--out",
            "/nonexistent-dir/cert.json",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(!output.stderr.is_empty());
}

#[test]
fn unknown_subcommand_exits_with_usage_error() {
    let output = binary().args(["frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_with_usage_error() {
    let output = binary()
        .args(["coeffs", "--n", "3", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
