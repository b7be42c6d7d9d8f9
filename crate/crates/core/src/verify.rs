//! Acceptance suite: twelve pass/fail checks over every module, with pinned tolerances.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apps::{elasticity_table, fkpp_table, ElasticityParams, FkppParams};
use crate::conjugate::{ConjugateFlows, ConjugatePolys, Fault, Scalar, H, HP, C, NVARS, OMEGA, RHO};
use crate::error::{Error, Result};
use crate::hierarchy::DEFAULT_D_MAX;
use crate::numerics::{brent, fit_slope};
use crate::orbit::{connect, connect_fkpp, linearize_along, WINDOW};
use crate::reduced::ReducedOde;
use crate::spectrum::elasticity_family;
use crate::waterwave::{Preset, WaterwaveModel, WaterwaveParams};
use crate::wavefield::{StreamlineKind, TraceOptions, WaveField};

/// Tolerances of the acceptance checks.
pub mod tol {
    pub const NU0: f64 = 1e-8;
    pub const NU1: f64 = 1e-4;
    pub const PHI0: f64 = 1e-6;
    pub const RHO0: f64 = 1e-8;
    pub const SIMPLICITY: f64 = -0.1;
    pub const PROFILE: f64 = 1e-6;
    pub const SOLVABILITY: f64 = 1e-8;
    pub const REDUCED_COEFFICIENT: f64 = 1e-8;
    pub const ORBIT_RESIDUAL: f64 = 1e-12;
    pub const ENDPOINT: f64 = 1e-6;
    pub const SHOOTING_FACTOR: f64 = 5.0;
    pub const SINK: f64 = 1e-8;
    pub const FLOAT_CONJUGATE: f64 = 1e-12;
    pub const SLOPE: f64 = 1e-6;
    pub const SERIES: f64 = 1e-10;
    pub const IDENTITY: f64 = 1e-12;
    pub const PRESET_COEFFICIENT: f64 = 1e-10;
    pub const CONSERVED_DRIFT: f64 = 1e-8;
    pub const FLOW_FORCE_GAP: f64 = 1e-12;
    pub const RESIDUAL_ORDER: f64 = 1.9;
    pub const FLAT_RESIDUAL: f64 = 1e-12;
    pub const CRITICAL_HEIGHT: f64 = 1e-6;
    pub const EYE_SLOPE: f64 = 0.5;
    pub const EYE_SLOPE_TOL: f64 = 0.02;
    pub const TANGENT: f64 = 1e-8;
}

/// Inputs of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Branch parameters for the exactness and conservation checks.
    pub eps: Vec<Scalar>,
    pub fault: Fault,
    /// Seed of the random admissible parameter draws.
    pub seed: u64,
    pub draws: usize,
    /// Base grid of the spectral and hierarchy checks.
    pub grid: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            eps: [(-1, 100), (-1, 1000), (1, 1000), (1, 100)].iter().map(|&(p, q)| Scalar::ratio(p, q)).collect(),
            fault: Fault::None,
            seed: 20240607,
            draws: 100,
            grid: 512,
        }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    /// Error message when the check could not be computed.
    pub error: Option<String>,
}

/// Pass/fail matrix of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<u8> {
        self.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect()
    }
}

/// Metrics and tolerances collected by one check.
#[derive(Default)]
struct Check {
    metrics: BTreeMap<String, f64>,
    tolerances: BTreeMap<String, f64>,
    pass: bool,
}

impl Check {
    fn new() -> Self {
        Self { pass: true, ..Self::default() }
    }

    /// Records `value ≤ bound`.
    fn le(&mut self, name: &str, value: f64, bound: f64) {
        self.metrics.insert(name.into(), value);
        self.tolerances.insert(name.into(), bound);
        self.pass &= value <= bound;
    }

    /// Records `value ≥ bound`.
    fn ge(&mut self, name: &str, value: f64, bound: f64) {
        self.metrics.insert(name.into(), value);
        self.tolerances.insert(format!("{name}.min"), bound);
        self.pass &= value >= bound;
    }

    /// Records `|value − target| ≤ bound` under `name`, storing the value.
    fn near(&mut self, name: &str, value: f64, target: f64, bound: f64) {
        self.metrics.insert(name.into(), value);
        self.tolerances.insert(format!("{name}.abs_error"), bound);
        self.pass &= (value - target).abs() <= bound;
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.metrics.insert(name.into(), if ok { 1.0 } else { 0.0 });
        self.pass &= ok;
    }
}

fn finish(id: u8, name: &str, outcome: Result<Check>) -> CriterionResult {
    match outcome {
        Ok(c) => CriterionResult { id, name: name.into(), pass: c.pass, metrics: c.metrics, tolerances: c.tolerances, error: None },
        Err(e) => CriterionResult {
            id,
            name: name.into(),
            pass: false,
            metrics: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs all twelve criteria.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.eps.is_empty() {
        return Err(Error::NothingToVerify("the epsilon list is empty".into()));
    }
    if cfg.grid < 16 {
        return Err(Error::InvalidParameter(format!("grid {} is too coarse", cfg.grid)));
    }
    let criteria = vec![
        finish(1, "transversal spectrum", spectrum(cfg)),
        finish(2, "fkpp critical parameter", fkpp_critical(cfg)),
        finish(3, "psi-hierarchy golden values", hierarchy(cfg)),
        finish(4, "closed-form orbit residuals", closed_forms(cfg)),
        finish(5, "shooting recovery", shooting()),
        finish(6, "conjugate-flow exactness", conjugate_exact(cfg)),
        finish(7, "branch derivatives", branch_derivatives(cfg)),
        finish(8, "water-wave coefficient identities", coefficient_identities(cfg)),
        finish(9, "conservation", conservation(cfg)),
        finish(10, "field residual order", field_order(cfg)),
        finish(11, "cat's-eye geometry", cats_eye(cfg)),
        finish(12, "linearization compatibility", linearization(cfg)),
    ];
    Ok(VerifyReport { criteria })
}

/// Root of `ρ tan ρ = β` on (0, π/2) by bisection.
pub fn rho_tan_rho_root(beta: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2 - 1e-12);
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

fn spectrum(cfg: &VerifyConfig) -> Result<Check> {
    let op = elasticity_family(cfg.grid)(-1.0)?;
    let pairs = op.eigen_lowest(2)?;
    let mut c = Check::new();
    c.near("nu0", pairs[0].value, 0.0, tol::NU0);
    c.near("nu1", pairs[1].value, -3.0, tol::NU1);
    let g = op.grid();
    let scale = pairs[0].vector[g.n / 2];
    let err = g.nodes().enumerate().map(|(i, y)| (pairs[0].vector[i] / scale - y.cos()).abs()).fold(0.0, f64::max);
    c.le("phi0_cos_error", err, tol::PHI0);
    Ok(c)
}

fn fkpp_critical(cfg: &VerifyConfig) -> Result<Check> {
    let crit = FkppParams::new(1.0, 3.0).critical(cfg.grid)?;
    let mut c = Check::new();
    c.near("rho0", crit.parameter, rho_tan_rho_root(1.0), tol::RHO0);
    c.le("nu1", crit.nu1, tol::SIMPLICITY);
    Ok(c)
}

fn profile_error<F: Fn(usize, f64) -> f64>(field: &crate::xpoly::XPolyField, exact: F) -> f64 {
    let g = field.grid();
    let mut err: f64 = 0.0;
    for m in 0..=field.degree().max(2) {
        let p = field.profile(m);
        for (i, y) in g.nodes().enumerate() {
            err = err.max((p[i] - exact(m, y)).abs());
        }
    }
    err
}

fn hierarchy(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    for (tag, p) in [
        ("b2_zero", ElasticityParams { b1: 1.0, b2: 0.0, w1: 1.0, lambda2: -1.0 }),
        ("b2_nonzero", ElasticityParams { b1: 1.3, b2: 0.7, w1: 0.9, lambda2: -0.8 }),
    ] {
        let t = elasticity_table(&p, cfg.grid, DEFAULT_D_MAX)?;
        let bl = p.b1_lambda2();
        let field = |idx| t.get(idx).ok_or_else(|| Error::InvalidParameter(format!("missing entry {idx:?}")));
        let e102 = profile_error(field([1, 0, 2])?, |m, y| if m == 2 { bl / 2.0 * y.cos() } else { 0.0 });
        let e300 = profile_error(field([3, 0, 0])?, |m, y| match m {
            2 => (3.0 * p.b2 + 6.0 * p.w1) / 8.0 * y.cos(),
            0 => (p.b2 - 6.0 * p.w1) / 32.0 * (y.cos() - (3.0 * y).cos()),
            _ => 0.0,
        });
        c.le(&format!("elasticity.{tag}.psi102_error"), e102, tol::PROFILE);
        c.le(&format!("elasticity.{tag}.psi300_error"), e300, tol::PROFILE);
        c.near(&format!("elasticity.{tag}.f102"), t.coefficient([1, 0, 2]), bl, tol::REDUCED_COEFFICIENT);
        c.near(&format!("elasticity.{tag}.f300"), t.coefficient([3, 0, 0]), 0.75 * (p.b2 + 2.0 * p.w1), tol::REDUCED_COEFFICIENT);
    }
    let (crit, t) = fkpp_table(&FkppParams::new(1.0, 3.0), cfg.grid, DEFAULT_D_MAX)?;
    let rho = crit.parameter;
    let get = |idx| t.get(idx).ok_or_else(|| Error::InvalidParameter(format!("missing entry {idx:?}")));
    let e011 = profile_error(get([0, 1, 1])?, |m, y| if m == 2 { -1.5 * (rho * y).cos() } else { 0.0 });
    let e102 = profile_error(get([1, 0, 2])?, |m, y| if m == 2 { -0.5 * (rho * y).cos() } else { 0.0 });
    c.le("fkpp.psi011_error", e011, tol::PROFILE);
    c.le("fkpp.psi102_error", e102, tol::PROFILE);
    let cube = (rho.sin() - rho.sin().powi(3) / 3.0) / rho;
    let square = 0.5 + (2.0 * rho).sin() / (4.0 * rho);
    c.near("fkpp.c2", t.coefficient([2, 0, 0]), cube / square, tol::SOLVABILITY);
    Ok(c)
}

fn front_params() -> ElasticityParams {
    ElasticityParams { b1: 1.0, b2: 0.0, w1: 1.0, lambda2: -1.0 }
}

fn pulse_params() -> ElasticityParams {
    ElasticityParams { b1: 1.0, b2: 0.0, w1: -1.0, lambda2: 1.0 }
}

fn homogeneous(cfg: &VerifyConfig) -> Result<WaterwaveModel> {
    WaterwaveModel::new(Preset::Homogeneous.params(), cfg.fault)
}

fn sample_x(k: usize) -> f64 {
    -5.0 + 10.0 * k as f64 / 99.0
}

fn closed_forms(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let eps = 0.1;
    let front = front_params();
    let sys = ReducedOde::elasticity(&front)?.scaled(eps)?;
    let (f102, f300) = (front.b1_lambda2(), 0.75 * (front.b2 + 2.0 * front.w1));
    let (a, k) = ((-f102 / f300).sqrt(), (-f102 / 2.0).sqrt());
    let mut err: f64 = 0.0;
    for i in 0..100 {
        let t = (k * sample_x(i)).tanh();
        err = err.max((-2.0 * a * k * k * t * (1.0 - t * t) - sys.f(a * t, 0.0)).abs());
    }
    c.le("tanh_front", err, tol::ORBIT_RESIDUAL);

    let pulse = pulse_params();
    let sys = ReducedOde::elasticity(&pulse)?.scaled(eps)?;
    let (f102, f300) = (pulse.b1_lambda2(), 0.75 * (pulse.b2 + 2.0 * pulse.w1));
    let (a, k) = ((-2.0 * f102 / f300).sqrt(), f102.sqrt());
    let mut err: f64 = 0.0;
    for i in 0..100 {
        let s = 1.0 / (k * sample_x(i)).cosh();
        err = err.max((a * k * k * s * (1.0 - 2.0 * s * s) - sys.f(a * s, 0.0)).abs());
    }
    c.le("sech_pulse", err, tol::ORBIT_RESIDUAL);

    let m = homogeneous(cfg)?;
    let co = &m.coefficients;
    let (f201, f300) = (co.f201.to_f64(), co.f300.to_f64());
    let a1 = -2.0 * f201 / (3.0 * f300);
    let l1 = (f201 * f201 / (18.0 * f300)).sqrt();
    let sys = m.reduced_ode()?.scaled(0.01)?;
    let mut err: f64 = 0.0;
    for i in 0..100 {
        let x = 0.6 * sample_x(i);
        let t = (l1 * x).tanh();
        let vxx = -a1 * l1 * l1 * t * (1.0 - t * t);
        err = err.max((vxx - sys.f(0.5 * a1 * (1.0 + t), 0.0)).abs() / (1.0 + vxx.abs()));
    }
    c.le("tanh_bore", err, tol::ORBIT_RESIDUAL);
    Ok(c)
}

fn shooting() -> Result<Check> {
    let mut c = Check::new();
    let eps = 0.05;
    let front = front_params();
    let ode = ReducedOde::elasticity(&front)?;
    let orbit = connect(&ode, eps, WINDOW)?;
    let (a1, k1) = ((2.0f64 / 3.0).sqrt(), 0.5f64.sqrt());
    let dev = orbit.sample(2001).iter().map(|[x, v, _]| (v - a1 * (k1 * x).tanh()).abs()).fold(0.0, f64::max);
    c.le("elasticity.endpoint_error", orbit.endpoint_error, tol::ENDPOINT);
    c.le("elasticity.sup_distance", eps * dev, tol::SHOOTING_FACTOR * eps * a1 * eps);

    let params = FkppParams::new(1.0, 3.0);
    let crit = params.critical(512)?;
    let ode = ReducedOde::fkpp(&params, crit.parameter)?;
    let (orbit, tri) = connect_fkpp(&ode, eps, WINDOW)?;
    let margin = orbit.sample(4001).iter().map(|[_, v, w]| tri.margin(*v, *w)).fold(f64::INFINITY, f64::min);
    c.flag("fkpp.inside_triangle", margin >= -1e-15);
    c.metrics.insert("fkpp.triangle_margin".into(), margin);
    c.le("fkpp.sink_distance", orbit.endpoint_error, tol::SINK);
    Ok(c)
}

fn to_rational(s: &Scalar) -> Result<BigRational> {
    match s {
        Scalar::Exact(q) => Ok(q.clone()),
        Scalar::Real(x) => BigRational::from_f64(*x).ok_or_else(|| Error::InvalidParameter(format!("epsilon {x} is not finite"))),
    }
}

fn conjugate_exact(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let p = Preset::Homogeneous.params();
    let clean = ConjugateFlows::new(p.rho.clone(), p.omega.clone())?;
    let series = clean.branch_expand(&p.h0, p.c0.as_ref().unwrap())?;
    let faulted = ConjugateFlows::with_fault(p.rho.clone(), p.omega.clone(), cfg.fault)?;
    let mut nonzero = 0usize;
    for e in &cfg.eps {
        let q = to_rational(e)?;
        let [h, hp, cc] = series
            .predict_exact(&q)
            .ok_or_else(|| Error::InvalidParameter("homogeneous series is not exact".into()))?;
        let r = faulted
            .residual_exact(&h, &hp, &cc)
            .ok_or_else(|| Error::InvalidParameter("exact residual unavailable".into()))?;
        nonzero += r.iter().filter(|v| !v.is_zero()).count();
    }
    c.le("homogeneous.nonzero_exact_residuals", nonzero as f64, 0.0);

    let ip = Preset::Irrotational.params();
    let flows = ConjugateFlows::with_fault(ip.rho.clone(), ip.omega.clone(), cfg.fault)?;
    let c0 = ip.c0.clone().unwrap();
    let base = flows.residual(ip.h0.to_f64(), ip.h0.to_f64(), c0.to_f64());
    let mut worst = base[0].abs().max(base[1].abs());
    let series = flows.branch_expand(&ip.h0, &c0)?;
    for e in &cfg.eps {
        let s = flows.continue_to(&series, e.to_f64())?;
        let r = flows.residual(s.h, s.hp, s.c);
        worst = worst.max(r[0].abs()).max(r[1].abs());
    }
    c.le("irrotational.float_residual", worst, tol::FLOAT_CONJUGATE);

    let polys = ConjugatePolys::with_fault(cfg.fault)?;
    c.flag("certificate.remainder_zero", polys.certificate.remainder_zero);
    c.flag("certificate.reconstruction_exact", polys.certificate.reconstruction_exact);
    Ok(c)
}

fn branch_derivatives(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    for (preset, hp1, c1) in [(Preset::GenericSmooth, -179.0 / 725.0, -6.0 / 29.0), (Preset::GenericCritical, 1.1, 0.75)] {
        let m = WaterwaveModel::new(preset.params(), cfg.fault)?;
        let (dh, dc) = m.flows.fd_slopes(&m.series, 1e-4)?;
        let name = preset.name();
        c.near(&format!("{name}.fd_dhp"), dh, hp1, tol::SLOPE);
        c.near(&format!("{name}.fd_dc"), dc, c1, tol::SLOPE);
        c.near(&format!("{name}.series_hp1"), m.series.hp1.to_f64(), hp1, tol::SERIES);
        c.near(&format!("{name}.series_c1"), m.series.c1.to_f64(), c1, tol::SERIES);
    }
    Ok(c)
}

/// Float-coefficient copy of a polynomial for fast scans.
fn float_terms(p: &crate::conjugate::MPoly) -> Vec<([u16; NVARS], f64)> {
    use num_traits::ToPrimitive;
    p.terms().map(|(m, q)| (*m, q.to_f64().unwrap_or(f64::NAN))).collect()
}

fn eval_terms(terms: &[([u16; NVARS], f64)], x: &[f64; NVARS]) -> f64 {
    terms.iter().map(|(m, q)| m.iter().zip(x).fold(*q, |acc, (e, v)| acc * v.powi(*e as i32))).sum()
}

/// `ω` making `c` a root of `c²(ρh+1−h) + cωρh(1−h) + (ρ−1)h(1−h)`.
fn omega_for(h: f64, c: f64, rho: f64) -> f64 {
    -(c * c * (rho * h + 1.0 - h) + (rho - 1.0) * h * (1.0 - h)) / (c * rho * h * (1.0 - h))
}

/// Random base points with `𝒫_dyn = 𝒫_new = 0` at `(h₀, h₀, c₀)` that pass admissibility.
pub fn random_admissible(seed: u64, count: usize, fault: Fault) -> Result<Vec<WaterwaveModel>> {
    let polys = ConjugatePolys::with_fault(fault)?;
    let new_terms = float_terms(&polys.new_poly);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 200 * count.max(1) {
            return Err(Error::DegenerateParameters(format!("only {} admissible draws in {attempts} attempts", out.len())));
        }
        let rho: f64 = rng.gen_range(0.05..1.0);
        let h: f64 = rng.gen_range(0.2..0.8);
        let phi = |c: f64| {
            let x = [h, h, c, rho, omega_for(h, c, rho)];
            let mut v = [0.0; NVARS];
            v[H] = x[0];
            v[HP] = x[1];
            v[C] = x[2];
            v[RHO] = x[3];
            v[OMEGA] = x[4];
            eval_terms(&new_terms, &v)
        };
        let grid: Vec<f64> = (0..=240).map(|k| 0.05 + 2.95 * k as f64 / 240.0).collect();
        let pick = rng.gen_range(0..4usize);
        let roots: Vec<f64> = grid
            .windows(2)
            .filter(|w| phi(w[0]) * phi(w[1]) < 0.0)
            .filter_map(|w| brent(|c| Ok(phi(c)), w[0], w[1], 1e-15).ok())
            .collect();
        if roots.is_empty() {
            continue;
        }
        let c0 = roots[pick % roots.len()];
        let params = WaterwaveParams {
            rho: Scalar::Real(rho),
            omega: Scalar::Real(omega_for(h, c0, rho)),
            h0: Scalar::Real(h),
            c0: Some(Scalar::Real(c0)),
        };
        if let Ok(m) = WaterwaveModel::new(params, fault) {
            out.push(m);
        }
    }
    Ok(out)
}

fn coefficient_identities(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let draws = random_admissible(cfg.seed, cfg.draws, cfg.fault)?;
    let mut worst: f64 = 0.0;
    for m in &draws {
        let co = &m.coefficients;
        let (f102, f201, f300) = (co.f102.to_f64(), co.f201.to_f64(), co.f300.to_f64());
        worst = worst.max((f102 - 2.0 * f201 * f201 / (9.0 * f300)).abs() / f102.abs().max(1.0));
    }
    c.metrics.insert("draws".into(), draws.len() as f64);
    c.flag("draw_count", draws.len() == cfg.draws);
    c.le("f102_identity", worst, tol::IDENTITY);

    let h = homogeneous(cfg)?;
    c.near("homogeneous.lambda1_sq", h.coefficients.lambda1_sq.to_f64(), 243.0 / 16.0, tol::PRESET_COEFFICIENT);
    c.near("homogeneous.a1", h.coefficients.a1.to_f64(), -2.0, tol::PRESET_COEFFICIENT);
    let irr = WaterwaveModel::new(Preset::Irrotational.params(), cfg.fault)?;
    let s = irr.rho().sqrt();
    let lambda = 3.0 * (s + 1.0).powi(4) / (4.0 * s * (s * s - s + 1.0));
    c.near("irrotational.a1", irr.coefficients.a1.to_f64(), -1.0, tol::PRESET_COEFFICIENT);
    c.near("irrotational.lambda1_sq", irr.coefficients.lambda1_sq.to_f64(), lambda, tol::PRESET_COEFFICIENT);
    Ok(c)
}

fn conservation(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let m = homogeneous(cfg)?;
    let ode = m.reduced_ode()?;
    let eps = 0.01;
    let orbit = connect(&ode, eps, WINDOW)?;
    let mut drift: f64 = 0.0;
    for [_, v, w] in orbit.sample(4001) {
        drift = drift.max(ode.conserved_scaled(eps, v, w)?.abs());
    }
    c.le("conserved_drift", drift, tol::CONSERVED_DRIFT);
    let eps: Vec<f64> = cfg.eps.iter().map(Scalar::to_f64).collect();
    for preset in Preset::ALL {
        let m = WaterwaveModel::new(preset.params(), cfg.fault)?;
        let gap = m.flows.sample_branch(&m.series, &eps)?.iter().map(|s| s.flow_force_gap).fold(0.0, f64::max);
        c.le(&format!("{}.flow_force_gap", preset.name()), gap, tol::FLOW_FORCE_GAP);
    }
    Ok(c)
}

/// Least-squares slope of `log values` against `log eps`.
pub fn log_slope(eps: &[f64], values: &[f64]) -> f64 {
    let lx: Vec<f64> = eps.iter().map(|e| e.abs().ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

fn field_order(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let m = homogeneous(cfg)?;
    let eps = [1e-2, 5e-3, 2.5e-3];
    let mut dynamic = Vec::new();
    let mut kinematic = Vec::new();
    for e in eps {
        let r = WaveField::reconstruct(&m, e)?.residuals(2001);
        dynamic.push(r.dynamic);
        kinematic.push(r.kinematic_interface);
    }
    let order = |v: &[f64]| log_slope(&eps, v);
    c.ge("dynamic_order", order(&dynamic), tol::RESIDUAL_ORDER);
    c.ge("kinematic_order", order(&kinematic), tol::RESIDUAL_ORDER);
    let mut flat: f64 = 0.0;
    for preset in Preset::ALL {
        let m = WaterwaveModel::new(preset.params(), cfg.fault)?;
        flat = flat.max(WaveField::reconstruct(&m, 0.0)?.residuals(401).max());
    }
    c.le("flat_residual", flat, tol::FLAT_RESIDUAL);
    Ok(c)
}

fn cats_eye(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let m = homogeneous(cfg)?;
    let eps = 0.01;
    let field = WaveField::reconstruct(&m, eps)?;
    let layer = field.critical_layer(801)?;
    c.near("critical_upstream", layer.upstream, 8.0 / 9.0 + 2.0 * eps / 3.0, tol::CRITICAL_HEIGHT);
    c.flag("critical_sign_pattern", layer.sign_pattern_ok);

    let sweep: Vec<f64> = (0..9).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
    let mut widths = Vec::new();
    for e in &sweep {
        widths.push(WaveField::closed_form(&m, *e)?.eye_bounds()?.half_width);
    }
    c.near("eye_slope", log_slope(&sweep, &widths), tol::EYE_SLOPE, tol::EYE_SLOPE_TOL);

    let mono = field.monotonicity(801, 9);
    c.le("eta_x_max", mono.eta_x_max, 0.0);
    c.flag("eta_x_strict", mono.eta_x_max < 0.0);

    let eye = field.eye_bounds()?;
    let top = field.h + field.interface_scaled(30.0).eta;
    let seeds = [
        ([30.0, 0.5 * top], StreamlineKind::Through),
        ([30.0, 0.5 * (top + eye.lower)], StreamlineKind::Through),
        ([30.0, eye.center - 0.5 * eye.half_width], StreamlineKind::Eye),
        ([30.0, eye.center + 0.5 * eye.half_width], StreamlineKind::Eye),
        ([30.0, 0.5 * (eye.upper + 1.0)], StreamlineKind::Through),
    ];
    let coarse = TraceOptions::default();
    let fine = TraceOptions { step: 0.5 * coarse.step, ..coarse };
    let (mut stable, mut pattern) = (true, true);
    for (seed, want) in seeds {
        let a = field.streamline(seed, &coarse)?;
        let b = field.streamline(seed, &fine)?;
        stable &= a.kind == b.kind;
        pattern &= a.kind == want && (want != StreamlineKind::Eye || a.opens_right());
    }
    c.flag("classification_stable", stable);
    c.flag("half_cat_eye_pattern", pattern);
    Ok(c)
}

fn linearization(cfg: &VerifyConfig) -> Result<Check> {
    let mut c = Check::new();
    let fk = FkppParams::new(1.0, 3.0);
    let rho0 = fk.critical(cfg.grid)?.parameter;
    let cases = [
        ("front", ReducedOde::elasticity(&front_params())?, 0.05),
        ("pulse", ReducedOde::elasticity(&pulse_params())?, 0.05),
        ("fkpp", ReducedOde::fkpp(&fk, rho0)?, 0.05),
        ("bore", homogeneous(cfg)?.reduced_ode()?, 0.01),
    ];
    for (name, ode, eps) in cases {
        let orbit = connect(&ode, eps, WINDOW)?;
        let lin = linearize_along(&ode, eps, &orbit)?;
        c.le(&format!("{name}.tangent_residual"), lin.tangent_residual, tol::TANGENT);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_root_solves_equation() {
        let r = rho_tan_rho_root(1.0);
        assert!((r * r.tan() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_epsilon_list_is_rejected() {
        let cfg = VerifyConfig { eps: vec![], ..VerifyConfig::default() };
        assert!(matches!(run(&cfg), Err(Error::NothingToVerify(_))));
    }

    #[test]
    fn omega_solves_bifurcation_factor() {
        let (h, c, rho) = (0.4, 0.9, 0.3);
        let w = omega_for(h, c, rho);
        let g = c * c * (rho * h + 1.0 - h) + c * w * rho * h * (1.0 - h) + (rho - 1.0) * h * (1.0 - h);
        assert!(g.abs() < 1e-15);
    }
}
