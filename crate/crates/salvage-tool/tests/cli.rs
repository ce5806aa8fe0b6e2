//! Behavior of the compiled binary: subcommands, exit codes, report shape,
//! CSV artifacts, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_salvage-tool"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON: {e}\n{}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn gallery_example1_exits_zero_with_round_trip_values() {
    let out = run(&["gallery", "example1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["beta_original"].as_f64().unwrap() - 3.0).abs() <= 1e-9);
    assert!((v["beta_transformed"].as_f64().unwrap() - 3.0).abs() <= 1e-9);
    assert!((v["mass_original"].as_f64().unwrap() - 1.5).abs() <= 1e-9);
    assert!((v["mass_transformed"].as_f64().unwrap() - 1.5).abs() <= 1e-9);
}

#[test]
fn gallery_example2_exits_three_with_diagnostics() {
    let out = run(&["gallery", "example2"]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    let issues = v["link"]["issues"].as_array().unwrap();
    assert!(issues.iter().any(|i| i["kind"] == "not_injective"));
    let escape = issues.iter().find(|i| i["kind"] == "image_escape").expect("escape witness");
    assert!(escape["qx"].as_f64().unwrap() > 2.0);
    // computed condition integrals are present under their exact names
    let c = &v["link"]["conditions"];
    for key in ["a1_sup_residual", "a2_min", "a3_integral", "a3_error", "a4_integral", "a4_error"] {
        assert!(c[key].is_number(), "missing {key}");
    }
    assert_eq!(c["verdicts"]["a1"], "pass");
    assert_eq!(c["verdicts"]["a3"], "fail");
    assert!((c["a3_integral"].as_f64().unwrap() - 2.0 / 105.0).abs() <= 1e-10);
    assert!(c["a4_integral"].as_f64().unwrap().abs() <= 1e-10);
}

#[test]
fn analyze_on_nonnegative_weight_exits_zero_with_empty_x_minus() {
    let dir = tempdir("analyze-nonneg");
    let problem = dir.join("p.json");
    std::fs::write(&problem, r#"{"domain": [-5, 5], "omega": "phi(x)", "g_prime": "x^2"}"#)
        .unwrap();
    let out = run(&["analyze", "--problem", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["x_minus"].as_array().unwrap().len(), 0);
    assert_eq!(v["x_minus_measure"].as_f64().unwrap(), 0.0);
}

#[test]
fn salvage_exit_codes_follow_the_verdict() {
    let dir = tempdir("salvage-verdicts");
    let violated = dir.join("violated.json");
    std::fs::write(
        &violated,
        r#"{"domain": [0, 3], "omega": "x - 1", "g_prime": "x",
            "tolerances": {"n_schedule": [8, 16]}}"#,
    )
    .unwrap();
    let out = run(&["salvage", "--problem", violated.to_str().unwrap(), "--bins", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "violated");
    assert!(!v["headline"]["violated_bins"].as_array().unwrap().is_empty());

    let out = run(&["salvage", "constant_effect", "--bins", "16", "--schedule", "8,16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "dominated");
}

#[test]
fn adversary_emits_the_spec_fields() {
    let out = run(&["adversary", "example1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    for key in ["center", "half_width", "epsilon", "amplitude", "achieved_beta"] {
        assert!(v[key].is_number(), "missing {key}");
    }
    assert!(v["achieved_beta"].as_f64().unwrap() < 0.0);

    let dir = tempdir("adversary-infeasible");
    let p = dir.join("p.json");
    std::fs::write(&p, r#"{"domain": [-5, 5], "omega": "phi(x)", "g_prime": "2"}"#).unwrap();
    let out = run(&["adversary", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["infeasible"], true);
}

#[test]
fn config_errors_exit_four() {
    // missing file
    let out = run(&["analyze", "--problem", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(4));

    // schema violation names the field
    let dir = tempdir("config-errors");
    let p = dir.join("p.json");
    std::fs::write(&p, r#"{"domain": [0, 3], "omega": "x - 1"}"#).unwrap();
    let out = run(&["analyze", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g_prime"));

    // unknown fixture
    let out = run(&["gallery", "nope"]);
    assert_eq!(out.status.code(), Some(4));

    // unknown flag (clap usage error)
    let out = run(&["analyze", "example1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(4));

    // link-check without a link
    let q = dir.join("nolink.json");
    std::fs::write(&q, r#"{"domain": [0, 3], "omega": "x - 1", "g_prime": "2"}"#).unwrap();
    let out = run(&["link-check", "--problem", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn z_override_flips_the_gaussian_partition() {
    let out = run(&["analyze", "gaussian", "--z", "-2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let minus = v["x_minus"].as_array().unwrap();
    assert_eq!(minus.len(), 1);
    assert!((minus[0][0].as_f64().unwrap() - 0.5).abs() <= 1e-9);
}

#[test]
fn out_dir_gets_plot_ready_csvs() {
    let dir = tempdir("csv-out");
    let out = run(&[
        "gallery",
        "example1",
        "--out",
        dir.to_str().unwrap(),
        "--schedule",
        "8,16",
        "--bins",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let samples = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    let mut lines = samples.lines();
    assert_eq!(lines.next().unwrap(), "x,omega,omega_tilde,g_prime");
    assert_eq!(samples.lines().count(), 2049); // header + 2048 samples
    // transformed weights vanish on the negative region and match 2x-4 high
    let row: Vec<&str> = samples.lines().nth(10).unwrap().split(',').collect();
    let x: f64 = row[0].parse().unwrap();
    assert!(x < 1.0);
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);

    let bins = std::fs::read_to_string(dir.join("bins.csv")).unwrap();
    assert!(bins.starts_with("bin_lo,bin_hi,mu_minus,mu_plus,leb_plus,omega_tilde_value,violated"));
    assert!(bins.lines().count() >= 2);
}

#[test]
fn reports_are_deterministic_across_runs() {
    let a = run(&["gallery", "gaussian", "--schedule", "16,32", "--bins", "32"]);
    let b = run(&["gallery", "gaussian", "--schedule", "16,32", "--bins", "32"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("salvage-tool-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
