use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_quietlaser"));
    cmd.args(args)
        .env_remove("QUIETLASER_SEED")
        .env_remove("QUIETLASER_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

const QUARTER: [&str; 4] = ["--gamma", "1.25", "--rabi", "3.5355339059327378"];

#[test]
fn analytic_reports_seven_eighths() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "a");
    let o = run(&[
        "analytic",
        "--gamma",
        "1.25",
        "--rabi",
        "3.5355339",
        "--omega-grid",
        "0.01:20:200log",
        "--out-dir",
        &out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary = json(&dir.path().join("a/summary.json"));
    assert!((summary["detected_level"].as_f64().unwrap() - 0.875).abs() < 1e-8);
    assert_eq!(summary["schema_version"], 1);
    for key in ["a", "mean_tau", "fano0", "A"] {
        assert!(summary[key].is_number(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("a/spectrum.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1\n"));
    let rows: Vec<&str> = csv
        .lines()
        .skip_while(|l| *l != "omega,s_over_r")
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 200);
    let first: Vec<f64> = rows[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.01);
}

#[test]
fn analytic_fano_at_unit_a() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "a");
    let o = run(&[
        "analytic",
        "--gamma",
        "1",
        "--rabi",
        "1.4142136",
        "--out-dir",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary = json(&dir.path().join("a/summary.json"));
    assert!((summary["fano0"].as_f64().unwrap() - 0.25).abs() < 1e-7);
}

#[test]
fn missing_rabi_is_a_usage_error() {
    let o = run(&["analytic", "--gamma", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--rabi") && err.contains("Usage"), "{err}");
}

#[test]
fn bad_parameters_exit_two() {
    assert_eq!(
        run(&["analytic", "--gamma", "-1", "--rabi", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "analytic",
            "--gamma",
            "1",
            "--rabi",
            "1",
            "--omega-grid",
            "1:2:3"
        ])
        .status
        .code(),
        Some(2)
    );
    let o = run_env(
        &["analytic", "--gamma", "1", "--rabi", "1"],
        &[("QUIETLASER_THREADS", "zero")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let (one, two) = (out_dir(&dir, "one"), out_dir(&dir, "two"));
    for out in [&one, &two] {
        let mut args = vec![
            "simulate",
            "--trajectories",
            "8",
            "--horizon",
            "4000",
            "--window",
            "100",
            "--seed",
            "42",
            "--out-dir",
            out,
        ];
        args.extend(QUARTER);
        assert_eq!(run(&args).status.code(), Some(0));
    }
    for file in ["spectrum.csv", "fano.json"] {
        assert_eq!(
            digest(&dir.path().join("one").join(file)),
            digest(&dir.path().join("two").join(file)),
            "{file}"
        );
    }
    let fano = json(&dir.path().join("one/fano.json"));
    assert_eq!(fano["seed"], 42);
}

#[test]
fn simulate_data_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = out_dir(&dir, threads);
        let mut args = vec![
            "simulate",
            "--trajectories",
            "6",
            "--horizon",
            "3000",
            "--window",
            "100",
            "--seed",
            "7",
            "--out-dir",
            &out,
        ];
        args.extend(QUARTER);
        let o = run_env(&args, &[("QUIETLASER_THREADS", threads)]);
        assert_eq!(o.status.code(), Some(0));
        let csv = fs::read_to_string(dir.path().join(threads).join("spectrum.csv")).unwrap();
        assert!(csv.contains(&format!("# threads={threads}\n")));
        let data: Vec<String> = csv
            .lines()
            .filter(|l| !l.starts_with("# threads="))
            .map(String::from)
            .collect();
        let mut fano = json(&dir.path().join(threads).join("fano.json"));
        fano.as_object_mut().unwrap().remove("threads");
        outputs.push((data, fano));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "s");
    let mut args = vec![
        "simulate",
        "--trajectories",
        "2",
        "--horizon",
        "3000",
        "--window",
        "50",
        "--out-dir",
        &out,
    ];
    args.extend(QUARTER);
    let o = run_env(&args, &[("QUIETLASER_SEED", "1234")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("s/fano.json"))["seed"], 1234);
}

#[test]
fn simulate_quarter_point_fano() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "s");
    let mut args = vec![
        "simulate",
        "--trajectories",
        "50",
        "--horizon",
        "40200",
        "--window",
        "200",
        "--seed",
        "11",
        "--out-dir",
        &out,
    ];
    args.extend(QUARTER);
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let f = json(&dir.path().join("s/fano.json"));
    assert!(f["n_windows"].as_u64().unwrap() >= 10_000);
    let fano = f["fano"].as_f64().unwrap();
    assert!((0.49..=0.55).contains(&fano), "{fano}");
    let csv = fs::read_to_string(dir.path().join("s/spectrum.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "omega,s_over_r,stderr"));
}

#[test]
fn poisson_control_is_shot_noise() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "p");
    let mut args = vec![
        "simulate",
        "--poisson-control",
        "--trajectories",
        "50",
        "--horizon",
        "40200",
        "--window",
        "200",
        "--seed",
        "5",
        "--out-dir",
        &out,
    ];
    args.extend(QUARTER);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let fano = json(&dir.path().join("p/fano.json"))["fano"]
        .as_f64()
        .unwrap();
    assert!((0.95..=1.05).contains(&fano), "{fano}");
}

#[test]
fn frequency_guard_violation_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "g");
    let mut args = vec![
        "simulate",
        "--trajectories",
        "2",
        "--horizon",
        "500",
        "--window",
        "10",
        "--omega-grid",
        "0.01:1:5log",
        "--seed",
        "1",
        "--out-dir",
        &out,
    ];
    args.extend(QUARTER);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}

#[test]
fn short_horizon_warns() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "w");
    let mut args = vec![
        "simulate",
        "--trajectories",
        "40",
        "--horizon",
        "50",
        "--window",
        "1",
        "--omega-grid",
        "2:10:3log",
        "--seed",
        "1",
        "--out-dir",
        &out,
    ];
    args.extend(QUARTER);
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn design_example_has_two_roots() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "d");
    let o = run(&[
        "design",
        "--paper-example",
        "--tau-p",
        "1e-6",
        "--nu",
        "1.42e9",
        "--out-dir",
        &out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let d = json(&dir.path().join("d/design.json"));
    assert_eq!(d["root_count"], 2);
    let low = &d["roots"][0];
    assert!((low["gamma_tau_p"].as_f64().unwrap() - 1.25).abs() < 1e-9);
    assert!((d["roots"][1]["gamma_tau_p"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!((low["detected_level"].as_f64().unwrap() - 0.875).abs() < 1e-9);
    let ratio = &low["design"]["volume_over_tau_p_sq"];
    assert_eq!(ratio["unit"], "m^3/s^2");
    assert!((ratio["value"].as_f64().unwrap() - 244.0).abs() <= 2.0);
    // sqrt(V / d) with V = 244.596e-12 m^3, d = 0.438283 um
    let side = &low["design"]["sqrt_area"];
    assert_eq!(side["unit"], "m");
    assert!((side["value"].as_f64().unwrap() - 0.0236237).abs() < 1e-6);
}

#[test]
fn design_without_steady_state_exits_three() {
    // V chosen so that rabi = 2 J
    let o = run(&[
        "design",
        "--pump-rate",
        "1e6",
        "--tau-p",
        "1e-6",
        "--volume",
        "7.64e-10",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("steady state"));
}

#[test]
fn design_needs_pump_rate_or_preset() {
    assert_eq!(
        run(&["design", "--tau-p", "1e-6", "--volume", "1e-10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "design",
            "--paper-example",
            "--pump-rate",
            "1",
            "--tau-p",
            "1e-6"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# quarter point\ngamma = 1.25\nrabi = 100\nomega_grid = 0.1:1:4log\n",
    )
    .unwrap();
    let out = out_dir(&dir, "c");
    let o = run(&[
        "analytic",
        "--config",
        cfg.to_str().unwrap(),
        "--rabi",
        "3.5355339059327378",
        "--out-dir",
        &out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = json(&dir.path().join("c/summary.json"));
    assert_eq!(s["config"]["rabi"], "3.5355339059327378");
    assert_eq!(s["config"]["omega_grid"], "0.1:1:4log");
    assert!((s["a"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn validate_full_suite_passes() {
    let o = run(&["validate"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("monte_carlo_fano"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn validate_quick_is_fast() {
    let start = Instant::now();
    let o = run(&["validate", "--quick"]);
    assert!(start.elapsed() < Duration::from_secs(5));
    assert_eq!(o.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("sampler_ks"));
}

#[test]
fn injected_fault_fails_validation() {
    let o = run(&["validate", "--quick", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalization"));
}
