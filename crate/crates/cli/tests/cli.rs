use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copula-markov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Parses CSV rows after the header.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn variance_path_is_constant_at_the_fixed_point() {
    let text = stdout(&["variance-path", "--rho", "-0.5", "--sigma", "1", "--t-max", "5"]);
    assert_eq!(text.lines().next(), Some("t,V_t,tau_adjacent,limit"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!(&r[1..], &[1.0, 0.5, 1.0]);
    }
}

#[test]
fn innovation_acf_limits() {
    let text = stdout(&[
        "acf",
        "--rho",
        "-0.5",
        "--sigma",
        "1",
        "--t",
        "50",
        "--k-max",
        "2",
        "--of",
        "innovations",
    ]);
    let rows = rows(&text);
    assert_eq!(rows[0][2], -0.25);
    assert_eq!(rows[1][2], -0.125);
    assert!((rows[0][1] + 0.25).abs() < 1e-12);
}

#[test]
fn independence_spectrum_is_zero() {
    let text = stdout(&["spectrum", "--copula", "independence", "--grid", "128", "--top", "3"]);
    assert_eq!(rows(&text), vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]);
}

#[test]
fn output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let p = path.to_str().unwrap();
    let printed = stdout(&["variance-path", "--rho", "-0.3", "--sigma", "1.7", "--t-max", "20"]);
    assert!(stdout(&[
        "variance-path",
        "--rho",
        "-0.3",
        "--sigma",
        "1.7",
        "--t-max",
        "20",
        "--out",
        p
    ])
    .is_empty());
    let written = fs::read_to_string(&path).unwrap();
    assert_eq!(written, printed);
    for line in written.lines().skip(1) {
        for field in line.split(',').skip(1) {
            let x: f64 = field.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), field);
        }
    }
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# defaults\nrho = -0.5\nt-max=2\nseed=3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = rows(&stdout(&["variance-path", "--config", c]));
    assert_eq!(from_file.len(), 2);
    assert_eq!(from_file[1][1], 1.0);
    let overridden = rows(&stdout(&["variance-path", "--config", c, "--rho", "-0.3"]));
    assert!(overridden[1][1] > 1.0);
}

#[test]
fn mixing_bound_json() {
    let text = stdout(&[
        "mixing-bound",
        "--rho",
        "-0.5",
        "--sigma",
        "1",
        "--t-window",
        "20",
        "--k-max",
        "10",
        "--grid",
        "64",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["eta_hat"], 0.5);
    assert_eq!(v["verdict"], true);
    let b = v["beta_bounds"].as_array().unwrap();
    assert_eq!(b.len(), 10);
    assert!(b[9].as_f64().unwrap() <= 6e-4);
    let positive = stdout(&["mixing-bound", "--rho", "0.2", "--t-window", "5", "--k-max", "3"]);
    let v: serde_json::Value = serde_json::from_str(&positive).unwrap();
    assert_eq!(v["verdict"], false);
}

#[test]
fn convolve_keeps_unit_variance() {
    let text = stdout(&[
        "convolve",
        "--copula",
        "gaussian:-0.5",
        "--sigma",
        "1",
        "--steps",
        "3",
        "--quad",
        "256",
    ]);
    for r in rows(&text) {
        assert!((r[2] - 1.0).abs() < 1e-3);
    }
}

#[test]
fn simulate_is_deterministic_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let s = summary.to_str().unwrap();
    let args = [
        "simulate",
        "--rho",
        "-0.5",
        "--paths",
        "5000",
        "--steps",
        "6",
        "--seed",
        "11",
        "--summary",
        s,
    ];
    let first = stdout(&args);
    assert_eq!(stdout(&args), first);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert!((v["final_variance"].as_f64().unwrap() - 1.0).abs() < 0.1);
    assert_eq!(first.lines().count(), 7);
}

#[test]
fn star_finds_the_product_parameter() {
    let text = stdout(&[
        "star",
        "--copula",
        "gaussian:-0.5",
        "--copula",
        "gaussian:0.4",
        "--grid",
        "128",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["nearest_gaussian_rho"].as_f64().unwrap() + 0.2).abs() < 1e-3);
    assert!(v["sup_residual"].as_f64().unwrap() < 1e-2);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["variance-path", "--rho", "-0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["acf", "--rho", "1.5", "--t", "3", "--k-max", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["star", "--copula", "gaussian:0.5", "--grid", "8"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["spectrum", "--copula", "clayton:2"]).status.code(), Some(2));
    let unwritable = run(&[
        "variance-path",
        "--rho",
        "-0.5",
        "--t-max",
        "3",
        "--out",
        "/nonexistent/dir/v.csv",
    ]);
    assert_eq!(unwritable.status.code(), Some(1));
}
