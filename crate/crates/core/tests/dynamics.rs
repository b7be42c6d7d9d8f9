//! Reduced planar dynamics against closed-form oracles.

use cylinder_core::apps::{ElasticityParams, FkppParams};
use cylinder_core::orbit::{connect, connect_fkpp, integrate_orbit, linearize_along, variational_from, WINDOW};
use cylinder_core::reduced::{EquilibriumKind, ReducedOde};
use proptest::prelude::*;

fn front_params() -> ElasticityParams {
    ElasticityParams { b1: 1.0, b2: 0.0, w1: 1.0, lambda2: -1.0 }
}

fn pulse_params() -> ElasticityParams {
    ElasticityParams { b1: 1.0, b2: 0.0, w1: -1.0, lambda2: 1.0 }
}

/// Homogeneous bore: f₃₀₀ = 243/8 and a₁ = −2 fix the rest.
fn homogeneous_bore() -> ReducedOde {
    let f300 = 243.0 / 8.0;
    let a1 = -2.0;
    ReducedOde::waterwave(a1 * a1 * f300 / 2.0, -1.5 * f300 * a1, f300, -4.0 / 6.0).unwrap()
}

#[test]
fn tanh_front_solves_truncated_equation() {
    let ode = ReducedOde::elasticity(&front_params()).unwrap();
    let sys = ode.scaled(0.1).unwrap();
    let (bl, w1) = (-1.0f64, 1.0f64);
    let a1 = (-2.0 * bl / (3.0 * w1)).sqrt();
    let k1 = (-bl / 2.0).sqrt();
    for i in 0..100 {
        let x = -10.0 + 20.0 * i as f64 / 99.0;
        let t = (k1 * x).tanh();
        let v = a1 * t;
        let vxx = -2.0 * a1 * k1 * k1 * t * (1.0 - t * t);
        assert!((vxx - sys.f(v, 0.0)).abs() <= 1e-12);
    }
}

#[test]
fn sech_pulse_solves_truncated_equation() {
    let ode = ReducedOde::elasticity(&pulse_params()).unwrap();
    let sys = ode.scaled(0.1).unwrap();
    let (a1, k1) = ((4.0f64 / 3.0).sqrt(), 1.0f64);
    for i in 0..100 {
        let x = -10.0 + 20.0 * i as f64 / 99.0;
        let s = 1.0 / (k1 * x).cosh();
        let vxx = a1 * k1 * k1 * s * (1.0 - 2.0 * s * s);
        assert!((vxx - sys.f(a1 * s, 0.0)).abs() <= 1e-12);
    }
}

#[test]
fn bore_profile_solves_truncated_equation() {
    let ode = homogeneous_bore();
    let sys = ode.scaled(0.01).unwrap();
    let (a1, l1) = (-2.0f64, (243.0f64 / 16.0).sqrt());
    for i in 0..100 {
        let x = -3.0 + 6.0 * i as f64 / 99.0;
        let t = (l1 * x).tanh();
        let v = 0.5 * a1 * (1.0 + t);
        let vxx = -a1 * l1 * l1 * t * (1.0 - t * t);
        assert!((vxx - sys.f(v, 0.0)).abs() <= 1e-12 * (1.0 + vxx.abs()), "{x}");
    }
}

#[test]
fn elasticity_front_matches_tanh() {
    let eps = 0.05;
    let ode = ReducedOde::elasticity(&front_params()).unwrap();
    let orbit = connect(&ode, eps, WINDOW).unwrap();
    let a1 = (2.0f64 / 3.0).sqrt();
    let k1 = 0.5f64.sqrt();
    assert!(orbit.endpoint_error <= 1e-6);
    let dev = orbit
        .sample(2001)
        .iter()
        .map(|[x, v, _]| (v - a1 * (k1 * x).tanh()).abs())
        .fold(0.0, f64::max);
    assert!(eps * dev <= 5.0 * eps * a1 * eps, "{dev}");
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn elasticity_pulse_matches_sech() {
    let ode = ReducedOde::elasticity(&pulse_params()).unwrap();
    let orbit = connect(&ode, 0.05, WINDOW).unwrap();
    let a1 = (4.0f64 / 3.0).sqrt();
    let dev = orbit.sample(2001).iter().map(|[x, v, _]| (v - a1 / x.cosh()).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev}");
    assert!(orbit.endpoint_error < 1e-6);
}

#[test]
fn fisher_front_matches_exact_solution() {
    let lambda1 = 5.0 / 6f64.sqrt();
    let ode = ReducedOde::fkpp(&FkppParams::new(1.0, lambda1), 0.860_333_589_019_38).unwrap();
    let (orbit, tri) = connect_fkpp(&ode, 0.05, WINDOW).unwrap();
    let sigma = tri.sigma;
    let c = 2f64.sqrt() - 1.0;
    let dev = orbit
        .sample(2001)
        .iter()
        .map(|[x, v, _]| (v - 1.0 / (sigma * (1.0 + c * (x / 6f64.sqrt()).exp()).powi(2))).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn fisher_front_stays_in_triangle_and_is_monotone() {
    let ode = ReducedOde::fkpp(&FkppParams::new(1.0, 3.0), 0.860_333_589_019_38).unwrap();
    let (orbit, tri) = connect_fkpp(&ode, 0.05, WINDOW).unwrap();
    assert!(orbit.endpoint_error <= 1e-8);
    let samples = orbit.sample(4001);
    for w in samples.windows(2) {
        assert!(w[1][1] <= w[0][1]);
    }
    for [_, v, w] in &samples {
        assert!(tri.margin(*v, *w) >= -1e-15);
    }
    let eq = ode.equilibria(0.05).unwrap();
    assert_eq!(eq[0].kind, EquilibriumKind::Sink);
}

#[test]
fn bore_conserves_flow_force() {
    let eps = 0.01;
    let ode = homogeneous_bore();
    let orbit = connect(&ode, eps, WINDOW).unwrap();
    let drift = orbit
        .sample(4001)
        .iter()
        .map(|[_, v, w]| ode.conserved_scaled(eps, *v, *w).unwrap().abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-8, "{drift}");
    assert!(orbit.mismatch < 1e-6);
    assert!((orbit.to + 2.0).abs() < 1e-12);
}

#[test]
fn conserved_quantity_matches_horner() {
    let ode = homogeneous_bore();
    let (f102, f201, f300) = (243.0 / 4.0, 729.0 / 8.0, 243.0 / 8.0);
    for (v, w) in [(0.3, -0.7), (-1.1, 2.0), (1.7, 0.1)] {
        let horner = 0.5 * w * w - v * v * (f102 / 2.0 + v * (f201 / 3.0 + v * f300 / 4.0));
        assert!((ode.conserved_scaled(0.01, v, w).unwrap() - horner).abs() < 1e-12);
    }
    assert_eq!(ode.conserved_scaled(0.01, 0.0, 0.0).unwrap(), 0.0);
    assert!(ode.conserved_scaled(0.01, -2.0, 0.0).unwrap().abs() < 1e-12);
}

#[test]
fn tangent_solves_variational_equation() {
    let cases = [
        (ReducedOde::elasticity(&front_params()).unwrap(), 0.05),
        (ReducedOde::elasticity(&pulse_params()).unwrap(), 0.05),
        (ReducedOde::fkpp(&FkppParams::new(1.0, 3.0), 0.860_333_589_019_38).unwrap(), 0.05),
        (homogeneous_bore(), 0.01),
    ];
    for (ode, eps) in cases {
        let orbit = connect(&ode, eps, WINDOW).unwrap();
        let lin = linearize_along(&ode, eps, &orbit).unwrap();
        assert!(lin.tangent_residual <= 1e-8, "{:?} {}", ode.application, lin.tangent_residual);
    }
}

#[test]
fn front_has_one_bounded_direction() {
    let ode = ReducedOde::elasticity(&front_params()).unwrap();
    let orbit = connect(&ode, 0.05, WINDOW).unwrap();
    let lin = linearize_along(&ode, 0.05, &orbit).unwrap();
    for w in &lin.wronskians {
        assert!((w - 1.0).abs() < 1e-8, "{w}");
    }
    assert!(lin.transverse_growth.iter().all(|g| *g > 1e3));
}

#[test]
fn variational_flow_at_equilibrium() {
    let ode = ReducedOde::elasticity(&front_params()).unwrap();
    let a1 = (2.0f64 / 3.0).sqrt();
    let traj = variational_from(&ode, 0.05, [a1, 0.0], 1.0).unwrap();
    let y = traj.y_end();
    let (tr, det) = (y[2] + y[5], y[2] * y[5] - y[3] * y[4]);
    let disc = (tr * tr - 4.0 * det).sqrt();
    let (l1, l2) = (((tr + disc) / 2.0).ln(), ((tr - disc) / 2.0).ln());
    // Jacobian [[0, 1], [F_V, 0]] with F_V = −1 + 3·(3/2)·a₁² = 2.
    assert!((l1 - 2f64.sqrt()).abs() < 1e-8 && (l2 + 2f64.sqrt()).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reversor_maps_orbits_to_orbits(v in -0.7f64..0.7, w in -0.3f64..0.3, t in 0.5f64..4.0) {
        let ode = ReducedOde::elasticity(&front_params()).unwrap();
        let fwd = integrate_orbit(&ode, 0.05, [v, w], 0.0, t).unwrap();
        let bwd = integrate_orbit(&ode, 0.05, [v, -w], 0.0, -t).unwrap();
        let (a, b) = (fwd.y_end(), bwd.y_end());
        prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] + b[1]).abs() < 1e-9);
    }

    #[test]
    fn classification_is_stable(delta in -1e-8f64..1e-8) {
        let p = ElasticityParams { lambda2: -1.0 + delta, ..front_params() };
        let kinds: Vec<_> = ReducedOde::elasticity(&p).unwrap().equilibria(0.1).unwrap().iter().map(|e| e.kind).collect();
        prop_assert_eq!(kinds, vec![EquilibriumKind::Saddle, EquilibriumKind::Center, EquilibriumKind::Saddle]);
    }
}
