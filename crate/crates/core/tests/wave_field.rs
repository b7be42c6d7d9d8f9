//! Reconstructed bore fields: residual orders, critical layers, cat's eye and streamlines.

use cylinder_core::conjugate::FlowState;
use cylinder_core::numerics::fit_slope;
use cylinder_core::orbit::WINDOW;
use cylinder_core::waterwave::{Preset, WaterwaveModel};
use cylinder_core::wavefield::{Layer, MonotoneSign, StreamlineKind, TraceOptions, WaveField};
use proptest::prelude::*;

fn homogeneous() -> WaterwaveModel {
    WaterwaveModel::from_preset(Preset::Homogeneous).unwrap()
}

fn order(eps: &[f64], values: &[f64]) -> f64 {
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

#[test]
fn zero_amplitude_field_is_exact() {
    for preset in Preset::ALL {
        let m = WaterwaveModel::from_preset(preset).unwrap();
        let r = WaveField::reconstruct(&m, 0.0).unwrap().residuals(401);
        assert!(r.max() <= 1e-12, "{preset:?} {r:?}");
    }
}

#[test]
fn far_field_limits() {
    let m = homogeneous();
    for eps in [0.01, -0.01, 0.003] {
        let f = WaveField::reconstruct(&m, eps).unwrap();
        let x = WINDOW / eps.abs();
        assert!(f.interface(-x).eta.abs() <= 1e-6);
        assert!((f.interface(x).eta - (f.hp - f.h)).abs() <= 1e-6);
    }
}

#[test]
fn orbit_profile_matches_tanh_profile() {
    let m = homogeneous();
    let a = WaveField::reconstruct(&m, 0.01).unwrap();
    let b = WaveField::closed_form(&m, 0.01).unwrap();
    for k in 0..=400 {
        let xs = -5.0 + 10.0 * k as f64 / 400.0;
        let (p, q) = (a.interface_scaled(xs), b.interface_scaled(xs));
        assert!((p.eta - q.eta).abs() <= 1e-8, "{xs}");
        assert!((p.eta_x - q.eta_x).abs() <= 1e-8, "{xs}");
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let f = WaveField::closed_form(&homogeneous(), 0.01).unwrap();
    let d = 1e-2;
    for (x, y) in [(-20.0, 0.3), (5.0, 0.5), (31.0, 0.85), (60.0, 0.95)] {
        let p = f.psi(x, y);
        let c = |u: f64, v: f64| f.psi(u, v).psi;
        let px = (c(x + d, y) - c(x - d, y)) / (2.0 * d);
        let pxx = (c(x + d, y) - 2.0 * p.psi + c(x - d, y)) / (d * d);
        let e = 1e-5;
        let py = (c(x, y + e) - c(x, y - e)) / (2.0 * e);
        assert!((px - p.psi_x).abs() <= 1e-9, "{x} {y}");
        assert!((pxx - p.psi_xx).abs() <= 1e-7 * (1.0 + p.psi_xx.abs()), "{x} {y} {pxx} {}", p.psi_xx);
        assert!((py - p.psi_y).abs() <= 1e-8, "{x} {y}");
    }
}

#[test]
fn walls_are_exact_and_downstream_slope_matches_flux() {
    let m = homogeneous();
    for eps in [0.01, 0.005, -0.004] {
        let f = WaveField::reconstruct(&m, eps).unwrap();
        let r = f.residuals(801);
        assert!(r.lower_wall <= 1e-12 && r.upper_wall <= 1e-12, "{r:?}");
        let far = f.psi1(1e9, 0.0).psi_y;
        let state = FlowState::new(f.h, f.hp, f.c, f.rho, f.omega);
        assert!((far + state.c1_plus()).abs() <= 1e-12);
    }
}

#[test]
fn interface_residuals_are_second_order() {
    let m = homogeneous();
    let eps = [1e-2, 5e-3, 2.5e-3];
    let res: Vec<_> = eps.iter().map(|e| WaveField::reconstruct(&m, *e).unwrap().residuals(2001)).collect();
    let dynamic: Vec<f64> = res.iter().map(|r| r.dynamic).collect();
    let kinematic: Vec<f64> = res.iter().map(|r| r.kinematic_interface).collect();
    assert!(order(&eps, &dynamic) >= 1.9, "{dynamic:?}");
    assert!(order(&eps, &kinematic) >= 1.9, "{kinematic:?}");
    let ratio = kinematic[0] / kinematic[1];
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    // Upper-layer kinematic defect is exactly −ωη²/2 at the downstream amplitude.
    let f = WaveField::reconstruct(&m, 1e-2).unwrap();
    let oracle = 0.5 * 9.0 * (f.hp - f.h).powi(2);
    assert!((res[0].kinematic_interface - oracle).abs() <= 1e-12 * oracle.max(1.0), "{oracle}");
}

#[test]
fn generic_presets_have_second_order_dynamic_residual() {
    for preset in [Preset::GenericSmooth, Preset::GenericCritical] {
        let m = WaterwaveModel::from_preset(preset).unwrap();
        let eps = [1e-2, 5e-3, 2.5e-3];
        let d: Vec<f64> = eps.iter().map(|e| WaveField::reconstruct(&m, *e).unwrap().residuals(1001).dynamic).collect();
        assert!(order(&eps, &d) >= 1.9, "{preset:?} {d:?}");
    }
}

#[test]
fn flow_force_drift_is_second_order() {
    let m = homogeneous();
    let eps = [1e-2, 5e-3, 2.5e-3];
    let f0 = WaveField::reconstruct(&m, 1e-2).unwrap();
    let state = FlowState::new(f0.h, f0.hp, f0.c, f0.rho, f0.omega);
    let up = state.flow_force(cylinder_core::conjugate::Side::Upstream);
    assert!((f0.flow_force_slice(-WINDOW) - up).abs() <= 1e-12);
    let drift: Vec<f64> = eps.iter().map(|e| WaveField::reconstruct(&m, *e).unwrap().flow_force_drift(801)).collect();
    let k: Vec<f64> = drift.iter().zip(eps).map(|(d, e)| d / (e * e)).collect();
    assert!(order(&eps, &drift) >= 1.9, "{drift:?}");
    assert!((k[0] / k[2] - 1.0).abs() < 0.1, "{k:?}");
}

#[test]
fn homogeneous_critical_layer_height() {
    let m = homogeneous();
    for eps in [0.0, 0.01, 0.002] {
        let f = WaveField::reconstruct(&m, eps).unwrap();
        let cl = f.critical_layer(801).unwrap();
        assert!((cl.upstream - (8.0 / 9.0 + 2.0 * eps / 3.0)).abs() <= 1e-6, "{}", cl.upstream);
        assert!((cl.upstream - (f.h - f.c / f.omega)).abs() <= 1e-8);
        assert!(cl.sign_pattern_ok && cl.psi_yy > 0.0);
    }
}

#[test]
fn generic_critical_layer_height() {
    let m = WaterwaveModel::from_preset(Preset::GenericCritical).unwrap();
    let f = WaveField::reconstruct(&m, 0.0).unwrap();
    assert!((f.critical_layer(11).unwrap().upstream - 13.0 / 18.0).abs() <= 1e-14);
    for eps in [1e-3, -1e-3] {
        let f = WaveField::reconstruct(&m, eps).unwrap();
        let yc = f.critical_layer(101).unwrap().upstream;
        assert!((yc - (13.0 / 18.0 + 25.0 * eps / 24.0)).abs() <= 50.0 * eps * eps, "{yc}");
    }
}

#[test]
fn no_critical_layer_without_vorticity_or_hypothesis() {
    let irr = WaterwaveModel::from_preset(Preset::Irrotational).unwrap();
    let f = WaveField::reconstruct(&irr, 0.01).unwrap();
    assert!(f.critical_layer(11).is_err());
    assert!(f.eye_bounds().is_err());
    let smooth = WaterwaveModel::from_preset(Preset::GenericSmooth).unwrap();
    assert!(WaveField::reconstruct(&smooth, 0.01).unwrap().critical_layer(11).is_err());
}

#[test]
fn eye_bounds_follow_square_root_law() {
    let m = homogeneous();
    let eps: Vec<f64> = (0..9).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
    let mut widths = Vec::new();
    for e in &eps {
        let f = WaveField::closed_form(&m, *e).unwrap();
        let eye = f.eye_bounds().unwrap();
        assert!(eye.lower < eye.center && eye.center < eye.upper);
        // Closed form: Y_c⁰ ± √(24ε)/9 for c₀ = 2, ω = −9, h₀ = 2/3, a₁ = −2.
        let r = (24.0 * e).sqrt() / 9.0;
        let yc = 8.0 / 9.0;
        assert!((eye.lower - (yc - r)).abs() <= 10.0 * e && (eye.upper - (yc + r)).abs() <= 10.0 * e, "{e} {eye:?}");
        widths.push(eye.half_width);
    }
    let slope = order(&eps, &widths);
    assert!((slope - 0.5).abs() <= 0.02, "{slope}");
    let flat = WaveField::reconstruct(&m, 0.0).unwrap().eye_bounds().unwrap();
    assert!((flat.lower - 8.0 / 9.0).abs() < 1e-14 && flat.upper == flat.lower);
    let reflected = WaveField::reconstruct(&m, -0.01).unwrap();
    assert!(reflected.eye_bounds().is_err());
}

#[test]
fn monotonicity_signs() {
    let m = homogeneous();
    let down = WaveField::reconstruct(&m, 0.01).unwrap().monotonicity(801, 9);
    assert_eq!(down.sign, MonotoneSign::Decreasing);
    assert!(down.pass && down.eta_x_max < 0.0);
    let up = WaveField::reconstruct(&m, -0.01).unwrap().monotonicity(801, 9);
    assert_eq!(up.sign, MonotoneSign::Increasing);
    let flat = WaveField::reconstruct(&m, 0.0).unwrap().monotonicity(101, 9);
    assert_eq!(flat.sign, MonotoneSign::Trivial);
}

fn seeds(f: &WaveField) -> Vec<[f64; 2]> {
    let eye = f.eye_bounds().unwrap();
    let top = f.h + f.interface_scaled(30.0).eta;
    vec![
        [30.0, 0.3],
        [30.0, top],
        [30.0, 0.5 * (top + eye.lower)],
        [30.0, eye.center - 0.5 * eye.half_width],
        [30.0, eye.center + 0.5 * eye.half_width],
        [30.0, eye.center + 0.9 * eye.half_width],
        [30.0, 0.5 * (eye.upper + 1.0)],
    ]
}

#[test]
fn streamline_classification_matches_half_cat_eye() {
    let f = WaveField::reconstruct(&homogeneous(), 0.01).unwrap();
    let coarse = TraceOptions::default();
    let fine = TraceOptions { step: 0.5 * coarse.step, ..coarse };
    let expected = [
        StreamlineKind::Through,
        StreamlineKind::Through,
        StreamlineKind::Through,
        StreamlineKind::Eye,
        StreamlineKind::Eye,
        StreamlineKind::Eye,
        StreamlineKind::Through,
    ];
    for (seed, want) in seeds(&f).into_iter().zip(expected) {
        let a = f.streamline(seed, &coarse).unwrap();
        let b = f.streamline(seed, &fine).unwrap();
        assert_eq!(a.kind, want, "{seed:?} {:?} {:?}", a.exits, a.turning_points);
        assert_eq!(b.kind, a.kind);
        if a.kind == StreamlineKind::Eye {
            assert!(a.opens_right());
            let tp = a.turning_points[0];
            assert!(tp.critical_offset.unwrap() <= 1e-4);
            assert!(tp.x < 30.0);
        }
    }
}

#[test]
fn interface_streamline_follows_interface() {
    let f = WaveField::reconstruct(&homogeneous(), 0.01).unwrap();
    let top = f.h + f.interface_scaled(0.0).eta;
    let s = f.streamline([0.0, top], &TraceOptions::default()).unwrap();
    assert_eq!(s.layer, Layer::Interface);
    assert_eq!(s.kind, StreamlineKind::Through);
    let dev = s.points.iter().map(|[x, y]| (y - f.h - f.interface_scaled(*x).eta).abs()).fold(0.0, f64::max);
    assert!(dev <= 1e-6, "{dev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interface_is_the_zero_streamline(xs in -40.0f64..40.0, eps in 1e-3f64..1e-2) {
        let f = WaveField::closed_form(&homogeneous(), eps).unwrap();
        let i = f.interface_scaled(xs);
        let top = f.h + i.eta;
        let x = xs / eps;
        prop_assert!(f.psi1(x, top).psi.abs() <= 1e-15);
        let expected = -0.5 * f.omega * i.eta * i.eta;
        prop_assert!((f.psi2(x, top).psi - expected).abs() <= 1e-15);
    }

    #[test]
    fn upstream_limit_is_exact(y in 0.01f64..0.99, eps in -1e-2f64..1e-2) {
        let f = WaveField::closed_form(&homogeneous(), eps).unwrap();
        let x = -1e12;
        let (a, b) = f.upstream(y);
        prop_assert_eq!(f.psi1(x, y).psi, a);
        prop_assert_eq!(f.psi2(x, y).psi, b);
    }
}
