//! Ψ-table entries against closed-form solutions.

use cylinder_core::apps::{elasticity_table, fkpp_table, ElasticityParams, FkppParams};
use cylinder_core::hierarchy::DEFAULT_D_MAX;

/// Root of `ρ tan ρ = β` on (0, π/2) by plain bisection.
fn rho0_oracle(beta: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tan() < beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫cos³/∫cos²` on (0, 1) in closed form.
fn c2_oracle(r: f64) -> f64 {
    let cube = (r.sin() - r.sin().powi(3) / 3.0) / r;
    let square = 0.5 + (2.0 * r).sin() / (4.0 * r);
    cube / square
}

fn max_profile_error<F: Fn(usize, f64) -> f64>(field: &cylinder_core::xpoly::XPolyField, exact: F, degree: usize) -> f64 {
    let g = field.grid();
    let mut err: f64 = 0.0;
    for m in 0..=degree.max(field.degree()) {
        let p = field.profile(m);
        for (i, y) in g.nodes().enumerate() {
            err = err.max((p[i] - exact(m, y)).abs());
        }
    }
    err
}

#[test]
fn elasticity_entries_match_closed_forms() {
    let p = ElasticityParams { b1: 1.3, b2: 0.7, w1: 0.9, lambda2: -0.8 };
    let t = elasticity_table(&p, 512, DEFAULT_D_MAX).unwrap();
    let bl = p.b1_lambda2();
    let e102 = max_profile_error(t.get([1, 0, 2]).unwrap(), |m, y| if m == 2 { bl / 2.0 * y.cos() } else { 0.0 }, 2);
    let (b2, w1) = (p.b2, p.w1);
    let e300 = max_profile_error(
        t.get([3, 0, 0]).unwrap(),
        |m, y| match m {
            2 => (3.0 * b2 + 6.0 * w1) / 8.0 * y.cos(),
            0 => (b2 - 6.0 * w1) / 32.0 * (y.cos() - (3.0 * y).cos()),
            _ => 0.0,
        },
        2,
    );
    println!("e102 {e102:e} e300 {e300:e}");
    assert!(e102 < 1e-6 && e300 < 1e-6);
    assert!((t.coefficient([1, 0, 2]) - bl).abs() < 1e-8);
    assert!((t.coefficient([3, 0, 0]) - 0.75 * (b2 + 2.0 * w1)).abs() < 1e-8, "{}", t.coefficient([3, 0, 0]));
    for idx in [[1, 0, 1], [0, 1, 1], [1, 1, 0], [2, 0, 0], [2, 0, 1]] {
        assert!(t.get(idx).map(|f| f.max_abs() < 1e-9).unwrap_or(true), "{idx:?}");
    }
    assert!(t.point_residual() < 1e-10);
}

#[test]
fn fkpp_entries_match_closed_forms() {
    let p = FkppParams::new(1.0, 3.0);
    let (crit, t) = fkpp_table(&p, 512, DEFAULT_D_MAX).unwrap();
    let rho = crit.parameter;
    println!("rho0 {rho} oracle {} nu1 {}", rho0_oracle(1.0), crit.nu1);
    assert!((rho - rho0_oracle(1.0)).abs() < 1e-8);
    let e011 = max_profile_error(t.get([0, 1, 1]).unwrap(), |m, y| if m == 2 { -1.5 * (rho * y).cos() } else { 0.0 }, 2);
    let e102 = max_profile_error(t.get([1, 0, 2]).unwrap(), |m, y| if m == 2 { -0.5 * (rho * y).cos() } else { 0.0 }, 2);
    let c2 = t.coefficient([2, 0, 0]);
    println!("e011 {e011:e} e102 {e102:e} c2 err {:e}", c2 - c2_oracle(rho));
    assert!(e011 < 1e-6 && e102 < 1e-6);
    assert!((c2 - c2_oracle(rho)).abs() < 1e-8);
}
