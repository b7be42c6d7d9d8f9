use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylinder-cm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).expect("report written");
    serde_json::from_str(&text).expect("report is JSON")
}

/// Root of `ρ tan ρ = 1` by bisection.
fn rho0() -> f64 {
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2 - 1e-12);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m * m.tan() < 1.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// `∫₀¹ cos³(ρy) / ∫₀¹ cos²(ρy)` by composite Simpson.
fn sigma_by_quadrature(rho: f64) -> f64 {
    let n = 2000;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let h = 1.0 / n as f64;
        let inner: f64 = (1..n).map(|k| f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(0.0) + f(1.0) + inner) * h / 3.0
    };
    simpson(&|y| (rho * y).cos().powi(3)) / simpson(&|y| (rho * y).cos().powi(2))
}

#[test]
fn homogeneous_bore_report_has_exact_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["waterwave", "--preset", "homogeneous", "--eps", "0.01"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "waterwave");
    let co = &r["results"]["coefficients"];
    assert_eq!(co["lambda1_sq"], "243/16");
    assert_eq!(co["a1"], "-2");
    let run0 = &r["results"]["runs"][0];
    let upstream = run0["critical_layer"]["upstream"].as_f64().unwrap();
    assert!((upstream - (8.0 / 9.0 + 0.02 / 3.0)).abs() < 1e-6);
    assert!(run0["streamlines"].as_array().unwrap().iter().any(|s| s["kind"] == "eye"));
    for f in ["interface_0.csv", "streamlines_0.csv", "critical_layer_0.csv", "streamlines_0.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);
    assert!(r["tolerances"]["acceptance.tangent"].is_number());
}

#[test]
fn fkpp_front_runs_from_the_saddle_to_the_sink() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fkpp", "--beta", "1", "--lambda1", "3", "--eps", "0.05"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("front_0.csv")).unwrap();
    let v: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let saddle = 1.0 / sigma_by_quadrature(rho0());
    assert!((v[0] - saddle).abs() < 1e-4, "{} vs {saddle}", v[0]);
    assert!(v.last().unwrap().abs() < 1e-4);
    assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let r = report(dir.path(), "fkpp");
    assert!((r["results"]["saddle"].as_f64().unwrap() - saddle).abs() < 1e-9);
}

#[test]
fn conjugate_slopes_are_exact_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjugate", "--rho", "25/52", "--omega", "-9/10"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "conjugate");
    assert_eq!(r["results"]["slopes"]["hp1"], "-179/725");
    assert_eq!(r["results"]["slopes"]["c1"], "-6/29");
    assert_eq!(r["results"]["c0"], "1/2");
    let fd = &r["results"]["fd_slopes"];
    assert!((fd["hp1"].as_f64().unwrap() + 179.0 / 725.0).abs() < 1e-6);
    assert!((fd["c1"].as_f64().unwrap() + 6.0 / 29.0).abs() < 1e-6);
    assert!(dir.path().join("branch.csv").exists());
}

#[test]
fn homogeneous_branch_is_exact_in_rational_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjugate", "--preset", "homogeneous", "--eps", "-1/100,-1/1000,1/1000,1/100"], dir.path());
    assert!(out.status.success());
    let r = report(dir.path(), "conjugate");
    let exact = r["results"]["exact_branch"].as_array().unwrap();
    assert_eq!(exact.len(), 4);
    assert!(exact.iter().all(|e| e["residual_zero"] == true));
    assert_eq!(exact[3]["hp"], "197/300");
}

#[test]
fn default_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 12);
    assert_eq!(report(dir.path(), "verify")["results"]["all_pass"], true);
}

#[test]
fn fault_injection_fails_conjugate_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--fault", "perturb-dyn"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let r = report(dir.path(), "verify");
    let failed: Vec<u64> =
        r["results"]["criteria"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["id"].as_u64().unwrap()).collect();
    for id in [6, 7, 8, 9] {
        assert!(failed.contains(&id), "criterion {id} should fail: {failed:?}");
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("acceptance"));
}

#[test]
fn empty_eps_list_is_nothing_to_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--eps", ""], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nothing to verify"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[fkpp]\nbeta = 1.0\nlambda1 = 3.0\nspeed = 2.0\n").unwrap();
    let out = run(&["fkpp", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("speed"));
}

#[test]
fn mismatched_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["elasticity", "--preset", "fkpp"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["spectrum"], dir.path()).status.code(), Some(2));
}

#[test]
fn inadmissible_parameters_are_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjugate", "--rho", "1", "--omega", "0"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn repeated_runs_give_identical_reports() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(run(&["waterwave", "--preset", "generic-critical", "--eps", "1/100"], d.path()).status.success());
    }
    let ra = std::fs::read(a.path().join("waterwave.json")).unwrap();
    let rb = std::fs::read(b.path().join("waterwave.json")).unwrap();
    assert_eq!(ra, rb);
    let sa = std::fs::read(a.path().join("streamlines_0.csv")).unwrap();
    assert_eq!(sa, std::fs::read(b.path().join("streamlines_0.csv")).unwrap());
}

#[test]
fn spectrum_csv_has_eigenvalue_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--preset", "spectrum-dirichlet", "--grid", "256"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eigenpairs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("y,phi0,phi1,phi2"));
    let nu: Vec<f64> = lines.next().unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    for (got, want) in nu.iter().zip([0.0, -3.0, -8.0]) {
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn format_flag_limits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["elasticity", "--preset", "elasticity-front", "--format", "json"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("elasticity.json").exists());
    assert!(!dir.path().join("orbit_0.csv").exists());
    let r = report(dir.path(), "elasticity");
    assert!(r["results"]["runs"][0]["orbit"]["endpoint_error"].as_f64().unwrap() < 1e-6);
    assert!((r["results"]["coefficients"]["3,0,0"].as_f64().unwrap() - 1.5).abs() < 1e-8);
}
