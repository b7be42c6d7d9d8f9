//! Conjugate flows against hand-written rational formulas, quadrature and known preset values.

use cylinder_core::conjugate::{poly_dyn, ConjugateFlows, Fault, FlowState, Scalar, Side};
use cylinder_core::waterwave::{Preset, WaterwaveModel};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn qi(n: i64) -> BigRational {
    q(n, 1)
}

/// 𝒫_dyn typed out term by term.
fn dyn_direct(h: &BigRational, hp: &BigRational, c: &BigRational, r: &BigRational, w: &BigRational) -> BigRational {
    let s = qi(2) - hp - h;
    let one_hp = qi(1) - hp;
    w * w * hp * hp * (hp - h) * &s * &s * r
        + qi(4) * hp * hp * (qi(2) * hp * hp - c * c * hp - qi(4) * hp - c * c * h + qi(2) * c * c + qi(2)) * r
        + qi(4) * c * w * (qi(1) - h) * hp * hp * &s * r
        - qi(4) * &one_hp * &one_hp * (qi(2) * hp * hp - c * c * hp - c * c * h)
}

/// 𝒫_flow typed out term by term.
fn flow_direct(h: &BigRational, hp: &BigRational, c: &BigRational, r: &BigRational, w: &BigRational) -> BigRational {
    w * w * hp * (hp - h) * (hp + qi(3) * h - qi(4)) * r + qi(12) * hp * (hp - c * c - qi(1)) * r
        + qi(12) * c * w * (h - qi(1)) * hp * r
        - qi(12) * (hp - qi(1)) * (hp - c * c)
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-40i64..40, 1i64..13).prop_map(|(p, d)| q(p, d))
}

fn unit_rational() -> impl Strategy<Value = BigRational> {
    (1i64..30).prop_map(|p| q(p, 31))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyn_matches_direct_formula(h in unit_rational(), hp in unit_rational(), c in rational(), r in unit_rational(), w in rational()) {
        let x = [h.clone(), hp.clone(), c.clone(), r.clone(), w.clone()];
        prop_assert_eq!(poly_dyn().eval(&x), dyn_direct(&h, &hp, &c, &r, &w));
    }

    #[test]
    fn dyn_symmetric_under_sign_flip(h in unit_rational(), hp in unit_rational(), c in rational(), r in unit_rational(), w in rational()) {
        let p = poly_dyn();
        let a = p.eval(&[h.clone(), hp.clone(), c.clone(), r.clone(), w.clone()]);
        let b = p.eval(&[h, hp, -c, r, -w]);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn float_evaluation_agrees_with_exact(h in unit_rational(), hp in unit_rational(), c in rational(), r in unit_rational(), w in rational()) {
        let s = ConjugateFlows::new(Scalar::Exact(r.clone()), Scalar::Exact(w.clone())).unwrap();
        let exact = s.residual_exact(&h, &hp, &c).unwrap();
        let float = s.residual(h.to_f64().unwrap(), hp.to_f64().unwrap(), c.to_f64().unwrap());
        for (e, f) in exact.iter().zip(float) {
            let e = e.to_f64().unwrap();
            prop_assert!((e - f).abs() <= 1e-13 * e.abs().max(1.0) * 1e2, "{} vs {}", e, f);
        }
    }

    #[test]
    fn flow_force_and_bernoulli_identities(h in unit_rational(), hp in unit_rational(), c in rational(), r in unit_rational(), w in rational()) {
        prop_assume!(h != hp);
        let st = FlowState::new(h.clone(), hp.clone(), c.clone(), r.clone(), w.clone());
        let ds = st.flow_force(Side::Upstream) - st.flow_force(Side::Downstream);
        let dq = st.bernoulli_upstream() - st.bernoulli_downstream();
        let dh = &h - &hp;
        let flow_side = -(&dh * &dh) * flow_direct(&h, &hp, &c, &r, &w) / (qi(24) * &hp * (&hp - qi(1)));
        let dyn_side = &dh * dyn_direct(&h, &hp, &c, &r, &w) / (qi(8) * &hp * &hp * (&hp - qi(1)) * (&hp - qi(1)));
        prop_assert_eq!(ds, flow_side);
        prop_assert_eq!(dq, dyn_side);
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

#[test]
fn flow_force_matches_quadrature() {
    let (h, hp, c, rho, w) = (0.55, 0.4, 0.8, 0.6, -1.7);
    let st = FlowState::new(h, hp, c, rho, w);
    let k = 0.5 * c * c + h;
    for side in [Side::Upstream, Side::Downstream] {
        let (top, a1, a2) = match side {
            Side::Upstream => (h, c, c),
            Side::Downstream => (hp, st.c1_plus(), st.c2_plus()),
        };
        let lower = |y: f64| 0.5 * a1 * a1 - y + k;
        let upper = |y: f64| {
            let s = y - top;
            let psi = -a2 * s - 0.5 * w * s * s;
            let psi_y = -a2 - w * s;
            0.5 * psi_y * psi_y - y - w * psi + k
        };
        let oracle = adaptive_simpson(&lower, 0.0, top, 1e-14) + rho * adaptive_simpson(&upper, top, 1.0, 1e-14);
        assert!((st.flow_force(side) - oracle).abs() < 1e-10, "{side:?}");
    }
}

#[test]
fn homogeneous_newton_solution() {
    let s = ConjugateFlows::new(Scalar::int(1), Scalar::int(-9)).unwrap();
    let sol = s.solve(2.0 / 3.0 + 0.01, (2.0 / 3.0, 2.0)).unwrap();
    assert!((sol.hp - (2.0 / 3.0 - 0.01)).abs() < 1e-12);
    assert!((sol.c - (2.0 - 0.03)).abs() < 1e-12);
    assert!(sol.residual <= 1e-12 && sol.iterations <= 50);
}

#[test]
fn irrotational_newton_solution_is_constant() {
    let c0 = 1.0 / 3f64.sqrt();
    let s = ConjugateFlows::new(Scalar::ratio(1, 4), Scalar::int(0)).unwrap();
    let sol = s.solve(2.0 / 3.0 + 0.01, (2.0 / 3.0 + 0.001, c0 + 0.001)).unwrap();
    assert!((sol.hp - 2.0 / 3.0).abs() < 1e-10 && (sol.c - c0).abs() < 1e-10);
}

#[test]
fn series_coefficients_at_presets() {
    let cases = [
        (Preset::Homogeneous, (-1.0, -3.0)),
        (Preset::GenericSmooth, (-179.0 / 725.0, -6.0 / 29.0)),
        (Preset::GenericCritical, (1.1, 0.75)),
        (Preset::Irrotational, (0.0, 0.0)),
    ];
    for (preset, (hp1, c1)) in cases {
        let m = WaterwaveModel::from_preset(preset).unwrap();
        assert!((m.series.hp1.to_f64() - hp1).abs() < 1e-10, "{preset:?}");
        assert!((m.series.c1.to_f64() - c1).abs() < 1e-10, "{preset:?}");
    }
    let m = WaterwaveModel::from_preset(Preset::GenericSmooth).unwrap();
    assert_eq!(m.series.hp1, Scalar::ratio(-179, 725));
    assert_eq!(m.series.c1, Scalar::ratio(-6, 29));
}

#[test]
fn finite_difference_slopes_match_preset_slopes() {
    for (preset, (hp1, c1)) in [(Preset::GenericSmooth, (-179.0 / 725.0, -6.0 / 29.0)), (Preset::GenericCritical, (1.1, 0.75))] {
        let m = WaterwaveModel::from_preset(preset).unwrap();
        let (a, b) = m.flows.fd_slopes(&m.series, 1e-4).unwrap();
        assert!((a - hp1).abs() < 1e-6 && (b - c1).abs() < 1e-6, "{preset:?}: {a} {b}");
    }
}

#[test]
fn homogeneous_series_is_an_exact_branch() {
    let m = WaterwaveModel::from_preset(Preset::Homogeneous).unwrap();
    for eps in [q(1, 1000), q(-1, 1000), q(1, 100), q(-1, 100)] {
        let [h, hp, c] = m.series.predict_exact(&eps).unwrap();
        // Closed form: h₊ = h₀ − ε, c = c₀ + ωε/3.
        assert_eq!(hp, q(2, 3) - &eps);
        assert_eq!(c, qi(2) - qi(3) * &eps);
        let r = m.flows.residual_exact(&h, &hp, &c).unwrap();
        assert!(r[0].is_zero() && r[1].is_zero());
    }
}

#[test]
fn injected_fault_breaks_exactness() {
    assert!(WaterwaveModel::new(Preset::Homogeneous.params(), Fault::PerturbDyn).is_err());
    let s = ConjugateFlows::with_fault(Scalar::int(1), Scalar::int(-9), Fault::PerturbDyn).unwrap();
    let eps = q(1, 100);
    let r = s.residual_exact(&(q(2, 3) + &eps), &(q(2, 3) - &eps), &(qi(2) - qi(3) * &eps)).unwrap();
    assert!(!r[0].is_zero());
}

#[test]
fn irrotational_branch_vanishes_in_floats() {
    let m = WaterwaveModel::from_preset(Preset::Irrotational).unwrap();
    assert!(m.admissibility.det_h_hp.abs() < 1e-12);
    assert!(!m.admissibility.nondegenerate && m.admissibility.admissible);
    for eps in [1e-3, -1e-3, 1e-2, -1e-2] {
        let (h, hp, c) = m.series.predict(eps);
        let r = m.flows.residual(h, hp, c);
        assert!(r[0].abs() <= 1e-12 && r[1].abs() <= 1e-12);
    }
}

#[test]
fn branch_samples_are_consistent() {
    for preset in Preset::ALL {
        let m = WaterwaveModel::from_preset(preset).unwrap();
        let eps = [1e-2, 5e-3, 2.5e-3, -1e-2];
        let samples = m.flows.sample_branch(&m.series, &eps).unwrap();
        for s in &samples {
            assert!(s.residual <= 1e-12, "{preset:?}");
            assert!(s.flow_force_gap <= 1e-12 && s.bernoulli_gap <= 1e-12 && s.flux_gap <= 1e-12, "{preset:?} {s:?}");
        }
        // |sample − series| = O(ε³) with a stable constant.
        let k: Vec<f64> = samples[..3].iter().map(|s| s.series_gap / s.eps.abs().powi(3)).collect();
        if k[0] > 1e-6 {
            assert!((k[0] / k[2] - 1.0).abs() < 0.1, "{preset:?} {k:?}");
        } else {
            assert!(samples.iter().all(|s| s.series_gap < 1e-12), "{preset:?}");
        }
    }
}

#[test]
fn admissibility_flags() {
    let hom = WaterwaveModel::from_preset(Preset::Homogeneous).unwrap().admissibility;
    assert!(hom.critical_layer && hom.nondegenerate && hom.f300_positive);
    let smooth = WaterwaveModel::from_preset(Preset::GenericSmooth).unwrap().admissibility;
    assert!(!smooth.critical_layer && smooth.admissible);
    let crit = WaterwaveModel::from_preset(Preset::GenericCritical).unwrap().admissibility;
    assert!(crit.critical_layer && crit.admissible);
}
