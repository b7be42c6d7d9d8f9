//! Reduced planar ODE `v'' = f(v, v', ε)`, its scaling, equilibria and closed-form profiles.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::apps::{fkpp_sigma, ElasticityParams, FkppParams};
use crate::error::{Error, Result};
use crate::hierarchy::PsiTable;
use crate::numerics::bisect;

/// Which problem a reduced ODE came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Application {
    Elasticity,
    Fkpp,
    Waterwave,
}

/// Exponents of `λ ∼ ε^p`, inverse length `ε^n`, amplitude `ε^q`, and the leading nonlinearity order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScalingPlan {
    pub p: u32,
    pub n: u32,
    pub q: u32,
    pub m: u32,
    /// Order of the linear coefficient `f_A(0,0,λ)` in `λ`.
    pub lambda_order: u32,
}

impl ScalingPlan {
    /// Checks the balances `2n = p·(λ order)` and `2n = (m − 1) q`.
    pub fn new(p: u32, n: u32, q: u32, m: u32, lambda_order: u32) -> Result<Self> {
        let plan = Self { p, n, q, m, lambda_order };
        if 2 * n != p * lambda_order || m < 2 || 2 * n != (m - 1) * q {
            return Err(Error::InvalidParameter(format!("unbalanced scaling plan {plan:?}")));
        }
        Ok(plan)
    }

    /// Factor multiplying `f_ijk` in the scaled equation `V'' = F(V, V')`.
    pub fn scaled_factor(&self, idx: [u8; 3], eps: f64) -> f64 {
        let (i, j, k) = (idx[0] as i64, idx[1] as i64, idx[2] as i64);
        let (q, n) = (self.q as i64, self.n as i64);
        let sign_pow = q * i + q * j + k - q;
        let abs_pow = sign_pow + n * j - 2 * n;
        let sign = if eps < 0.0 && sign_pow.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        sign * eps.abs().powi(abs_pow as i32)
    }
}

/// Truncated reduced ODE as a coefficient table `(i, j, k) ↦ f_ijk`.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedOde {
    pub application: Application,
    pub coefficients: BTreeMap<String, f64>,
    #[serde(skip)]
    table: BTreeMap<[u8; 3], f64>,
    pub plan: ScalingPlan,
    /// Coefficient of `W²` in the reduced flow force (water waves only).
    pub s020: Option<f64>,
}

/// Scaled planar vector field `V' = W`, `W' = F(V, W)` at fixed `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSystem {
    terms: Vec<(u8, u8, f64)>,
}

/// Stability type of a planar equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Saddle,
    Center,
    Sink,
    Source,
}

/// Rest point `(V, 0)` of the scaled system.
#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    /// Scaled location `V`.
    pub v_scaled: f64,
    /// Unscaled location `v = ε^q V`.
    pub v: f64,
    pub kind: EquilibriumKind,
    /// Jacobian eigenvalues as `(re, im)` pairs.
    pub eigenvalues: [(f64, f64); 2],
    /// `|F(V, 0)|` after polishing.
    pub residual: f64,
}

/// Point on a scaled orbit together with its unscaled trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub x_scaled: f64,
    pub v_scaled: f64,
    pub w_scaled: f64,
    pub x: f64,
    pub v: f64,
    pub dv: f64,
}

/// Closed-form solution type of the truncated equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `V = a tanh(κX)`.
    Front,
    /// `V = a sech(κX)`.
    Pulse,
    /// `V = a(1 + tanh(κX))/2`.
    Bore,
}

/// Amplitude and inverse length of a closed-form profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileShape {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub kappa: f64,
}

impl ProfileShape {
    /// `(V, W, V'')` at scaled position `X`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (a, k) = (self.amplitude, self.kappa);
        let t = (k * x).tanh();
        let s2 = 1.0 - t * t;
        match self.kind {
            ProfileKind::Front => (a * t, a * k * s2, -2.0 * a * k * k * t * s2),
            ProfileKind::Pulse => {
                let s = 1.0 / (k * x).cosh();
                (a * s, -a * k * s * t, a * k * k * s * (1.0 - 2.0 * s * s))
            }
            ProfileKind::Bore => (0.5 * a * (1.0 + t), 0.5 * a * k * s2, -a * k * k * t * s2),
        }
    }
}

fn key(idx: [u8; 3]) -> String {
    format!("{},{},{}", idx[0], idx[1], idx[2])
}

impl ReducedOde {
    pub fn from_coefficients(
        application: Application,
        plan: ScalingPlan,
        coefficients: &[([u8; 3], f64)],
        s020: Option<f64>,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (idx, c) in coefficients {
            if !c.is_finite() {
                return Err(Error::DegenerateParameters(format!("coefficient f{} is not finite", key(*idx))));
            }
            if *c != 0.0 {
                table.insert(*idx, *c);
            }
        }
        let coefficients = table.iter().map(|(k, v)| (key(*k), *v)).collect();
        Ok(Self { application, coefficients, table, plan, s020 })
    }

    /// `f = b₁λ₂Aε² + (3(b₂+2w₁)/4)A³`.
    pub fn elasticity(p: &ElasticityParams) -> Result<Self> {
        let plan = ScalingPlan::new(2, 1, 1, 3, 1)?;
        Self::from_coefficients(Application::Elasticity, plan, &[([1, 0, 2], p.f102()), ([3, 0, 0], p.f300())], None)
    }

    /// `f = σA² − ρ₂Aε² − λ₁Bε`.
    pub fn fkpp(p: &FkppParams, rho0: f64) -> Result<Self> {
        let plan = ScalingPlan::new(1, 1, 2, 2, 2)?;
        Self::from_coefficients(
            Application::Fkpp,
            plan,
            &[([2, 0, 0], fkpp_sigma(rho0)), ([1, 0, 2], -p.rho2), ([0, 1, 1], -p.lambda1)],
            None,
        )
    }

    /// Water-wave reduction `f = f₁₀₂Aε² + f₂₀₁A²ε + f₃₀₀A³`.
    pub fn waterwave(f102: f64, f201: f64, f300: f64, s020: f64) -> Result<Self> {
        let plan = ScalingPlan::new(1, 1, 1, 3, 2)?;
        Self::from_coefficients(
            Application::Waterwave,
            plan,
            &[([1, 0, 2], f102), ([2, 0, 1], f201), ([3, 0, 0], f300)],
            Some(s020),
        )
    }

    /// Replaces the coefficients by those of a solved Ψ-table.
    pub fn from_table(application: Application, plan: ScalingPlan, table: &PsiTable) -> Result<Self> {
        let coeffs: Vec<([u8; 3], f64)> = table.entries().map(|(idx, _)| (*idx, table.coefficient(*idx))).collect();
        Self::from_coefficients(application, plan, &coeffs, None)
    }

    pub fn coefficient(&self, idx: [u8; 3]) -> f64 {
        self.table.get(&idx).copied().unwrap_or(0.0)
    }

    /// `f(A, B, ε) = Σ f_ijk Aⁱ Bʲ εᵏ`.
    pub fn eval(&self, a: f64, b: f64, eps: f64) -> f64 {
        self.table
            .iter()
            .map(|(idx, c)| c * a.powi(idx[0] as i32) * b.powi(idx[1] as i32) * eps.powi(idx[2] as i32))
            .sum()
    }

    /// Whether `f(A, −B, ε) = f(A, B, ε)`.
    pub fn is_reversible(&self) -> bool {
        self.table.keys().all(|idx| idx[1] % 2 == 0)
    }

    /// Scaled system at `ε ≠ 0`; terms that vanish as `ε → 0` are kept with their `ε` factors.
    pub fn scaled(&self, eps: f64) -> Result<ScaledSystem> {
        if eps == 0.0 || !eps.is_finite() {
            return Err(Error::InvalidParameter("scaling needs a finite nonzero epsilon".into()));
        }
        let mut terms: Vec<(u8, u8, f64)> = Vec::new();
        for (idx, c) in &self.table {
            let f = c * self.plan.scaled_factor(*idx, eps);
            match terms.iter_mut().find(|t| t.0 == idx[0] && t.1 == idx[1]) {
                Some(t) => t.2 += f,
                None => terms.push((idx[0], idx[1], f)),
            }
        }
        Ok(ScaledSystem { terms })
    }

    /// Unscaled amplitude `v = ε^q V`.
    pub fn unscale_v(&self, eps: f64, v: f64) -> f64 {
        v * eps.powi(self.plan.q as i32)
    }

    /// Closed-form profile of the truncated scaled equation at `ε`.
    pub fn profile_shape(&self, eps: f64) -> Result<ProfileShape> {
        let sys = self.scaled(eps)?;
        let (c1, c2, c3) = (sys.coefficient(1, 0), sys.coefficient(2, 0), sys.coefficient(3, 0));
        if sys.terms.iter().any(|t| t.1 > 0 && t.2 != 0.0) {
            return Err(Error::NoProfile("damped equation has no closed-form profile".into()));
        }
        match self.application {
            Application::Elasticity => {
                if c2 != 0.0 {
                    return Err(Error::NoProfile("quadratic term present".into()));
                }
                if c1 < 0.0 && c3 > 0.0 {
                    Ok(ProfileShape { kind: ProfileKind::Front, amplitude: (-c1 / c3).sqrt(), kappa: (-c1 / 2.0).sqrt() })
                } else if c1 > 0.0 && c3 < 0.0 {
                    Ok(ProfileShape { kind: ProfileKind::Pulse, amplitude: (-2.0 * c1 / c3).sqrt(), kappa: c1.sqrt() })
                } else {
                    Err(Error::NoProfile(format!("f102 = {c1}, f300 = {c3}")))
                }
            }
            Application::Waterwave => {
                if !(c3 > 0.0) {
                    return Err(Error::NoProfile(format!("f300 = {c3} must be positive")));
                }
                let a1 = -2.0 * c2 / (3.0 * c3);
                Ok(ProfileShape { kind: ProfileKind::Bore, amplitude: a1, kappa: (c2 * c2 / (18.0 * c3)).sqrt() })
            }
            Application::Fkpp => Err(Error::NoProfile("Fisher-KPP fronts have no closed form here".into())),
        }
    }

    /// Closed-form profile value at scaled position `X`.
    pub fn truncated_profile(&self, eps: f64, x_scaled: f64) -> Result<PhaseState> {
        let shape = self.profile_shape(eps)?;
        let (v, w, _) = shape.eval(x_scaled);
        Ok(self.phase_state(eps, x_scaled, v, w))
    }

    /// Attaches unscaled coordinates `x = X/|ε|^n`, `v = ε^q V`, `v' = ε^q|ε|^n W`.
    pub fn phase_state(&self, eps: f64, x_scaled: f64, v: f64, w: f64) -> PhaseState {
        let len = eps.abs().powi(self.plan.n as i32);
        let amp = eps.powi(self.plan.q as i32);
        PhaseState { x_scaled, v_scaled: v, w_scaled: w, x: x_scaled / len, v: amp * v, dv: amp * len * w }
    }

    /// Truncated `½W² − f₁₀₂V²/2 − f₂₀₁V³/3 − f₃₀₀V⁴/4` in scaled variables.
    pub fn conserved_scaled(&self, eps: f64, v: f64, w: f64) -> Result<f64> {
        if self.application != Application::Waterwave {
            return Err(Error::NotHamiltonian);
        }
        let s = self.scaled(eps)?;
        Ok(0.5 * w * w - s.coefficient(1, 0) * v * v / 2.0 - s.coefficient(2, 0) * v.powi(3) / 3.0
            - s.coefficient(3, 0) * v.powi(4) / 4.0)
    }

    /// Equilibria of the scaled system, sorted by `V`.
    pub fn equilibria(&self, eps: f64) -> Result<Vec<Equilibrium>> {
        let sys = self.scaled(eps)?;
        let mut out: Vec<Equilibrium> =
            sys.rest_points().into_iter().map(|v| sys.classify(v, self.unscale_v(eps, v))).collect();
        out.sort_by(|a, b| a.v_scaled.total_cmp(&b.v_scaled));
        Ok(out)
    }

    /// Number of rest points expected for the application's generic regime.
    pub fn expected_equilibria(&self) -> usize {
        match self.application {
            Application::Fkpp => 2,
            Application::Elasticity | Application::Waterwave => 3,
        }
    }
}

impl ScaledSystem {
    /// Coefficient of `Vⁱ Wʲ`.
    pub fn coefficient(&self, i: u8, j: u8) -> f64 {
        self.terms.iter().filter(|t| t.0 == i && t.1 == j).map(|t| t.2).sum()
    }

    pub fn terms(&self) -> &[(u8, u8, f64)] {
        &self.terms
    }

    /// `F(V, W)`.
    pub fn f(&self, v: f64, w: f64) -> f64 {
        self.terms.iter().map(|(i, j, c)| c * v.powi(*i as i32) * w.powi(*j as i32)).sum()
    }

    /// `(∂_V F, ∂_W F)`.
    pub fn grad(&self, v: f64, w: f64) -> (f64, f64) {
        let mut fv = 0.0;
        let mut fw = 0.0;
        for (i, j, c) in &self.terms {
            let (i, j) = (*i as i32, *j as i32);
            if i > 0 {
                fv += c * i as f64 * v.powi(i - 1) * w.powi(j);
            }
            if j > 0 {
                fw += c * j as f64 * v.powi(i) * w.powi(j - 1);
            }
        }
        (fv, fw)
    }

    /// Right-hand side of the first-order system.
    pub fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        [y[1], self.f(y[0], y[1])]
    }

    /// Jacobian `[[0, 1], [F_V, F_W]]`.
    pub fn jacobian(&self, v: f64, w: f64) -> [[f64; 2]; 2] {
        let (fv, fw) = self.grad(v, w);
        [[0.0, 1.0], [fv, fw]]
    }

    /// Real roots of `F(·, 0)` inside the Cauchy bound.
    pub fn rest_points(&self) -> Vec<f64> {
        let deg = self.terms.iter().filter(|t| t.1 == 0 && t.2 != 0.0).map(|t| t.0).max().unwrap_or(0);
        if deg == 0 {
            return Vec::new();
        }
        let top = self.coefficient(deg, 0);
        let bound = 1.0
            + (0..deg).map(|i| (self.coefficient(i, 0) / top).abs()).fold(0.0, f64::max);
        let mut roots = Vec::new();
        if self.coefficient(0, 0) == 0.0 {
            roots.push(0.0);
        }
        let p = |v: f64| self.f(v, 0.0);
        let samples = 4000;
        let xs: Vec<f64> = (0..=samples).map(|k| -bound + 2.0 * bound * k as f64 / samples as f64).collect();
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (p(a), p(b));
            if fa == 0.0 {
                if !roots.iter().any(|r: &f64| (r - a).abs() < 1e-12 * bound) {
                    roots.push(a);
                }
                continue;
            }
            if fa * fb < 0.0 {
                if let Ok(r) = bisect(p, a, b, 1e-15 * bound) {
                    roots.push(self.polish(r));
                }
            }
        }
        // Double roots appear as sign-preserving minima of |F|; refine those too.
        for w in xs.windows(3) {
            let (fa, fb, fc) = (p(w[0]).abs(), p(w[1]).abs(), p(w[2]).abs());
            if fb < fa && fb < fc && p(w[0]) * p(w[2]) > 0.0 {
                let r = self.polish(w[1]);
                if p(r).abs() <= 1e-12 * (1.0 + top.abs()) {
                    roots.push(r);
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * bound);
        roots
    }

    fn polish(&self, mut v: f64) -> f64 {
        for _ in 0..20 {
            let fv = self.f(v, 0.0);
            let (d, _) = self.grad(v, 0.0);
            if fv == 0.0 || d == 0.0 {
                break;
            }
            let step = fv / d;
            let next = v - step;
            if (self.f(next, 0.0)).abs() >= fv.abs() {
                break;
            }
            v = next;
        }
        v
    }

    /// Classifies `(V, 0)` from the trace `F_W` and determinant `−F_V`.
    pub fn classify(&self, v: f64, v_unscaled: f64) -> Equilibrium {
        let (fv, fw) = self.grad(v, 0.0);
        let (tr, det) = (fw, -fv);
        let disc = tr * tr - 4.0 * det;
        let eigenvalues = if disc >= 0.0 {
            let r = disc.sqrt();
            [(0.5 * (tr + r), 0.0), (0.5 * (tr - r), 0.0)]
        } else {
            let r = (-disc).sqrt();
            [(0.5 * tr, 0.5 * r), (0.5 * tr, -0.5 * r)]
        };
        let kind = if det < 0.0 {
            EquilibriumKind::Saddle
        } else if tr.abs() <= 1e-14 * (1.0 + det.abs()) {
            EquilibriumKind::Center
        } else if tr < 0.0 {
            EquilibriumKind::Sink
        } else {
            EquilibriumKind::Source
        };
        Equilibrium { v_scaled: v, v: v_unscaled, kind, eigenvalues, residual: self.f(v, 0.0).abs() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn front() -> ReducedOde {
        ReducedOde::elasticity(&ElasticityParams { b1: 1.0, b2: 0.0, w1: 1.0, lambda2: -1.0 }).unwrap()
    }

    #[test]
    fn scaling_plans_balance() {
        assert!(ScalingPlan::new(2, 1, 1, 3, 1).is_ok());
        assert!(ScalingPlan::new(1, 1, 2, 2, 2).is_ok());
        assert!(ScalingPlan::new(1, 1, 1, 2, 2).is_err());
    }

    #[test]
    fn elasticity_coefficients_and_equilibria() {
        let ode = front();
        assert_eq!(ode.coefficient([1, 0, 2]), -1.0);
        assert_eq!(ode.coefficient([3, 0, 0]), 1.5);
        let eq = ode.equilibria(0.1).unwrap();
        let a1 = (2.0f64 / 3.0).sqrt();
        assert_eq!(eq.len(), 3);
        assert!((eq[0].v_scaled + a1).abs() < 1e-14 && (eq[2].v_scaled - a1).abs() < 1e-14);
        assert_eq!(eq[1].v_scaled, 0.0);
        assert!((eq[2].v - 0.1 * a1).abs() < 1e-15);
        assert_eq!(eq[0].kind, EquilibriumKind::Saddle);
        assert_eq!(eq[1].kind, EquilibriumKind::Center);
        assert_eq!(ode.eval(0.0, 0.0, 0.3), 0.0);
    }

    #[test]
    fn front_and_pulse_shapes() {
        let s = front().profile_shape(0.1).unwrap();
        assert!((s.amplitude - (2.0f64 / 3.0).sqrt()).abs() < 1e-15 && (s.kappa - 0.5f64.sqrt()).abs() < 1e-15);
        let p = ReducedOde::elasticity(&ElasticityParams { b1: 1.0, b2: 0.0, w1: -1.0, lambda2: 1.0 }).unwrap();
        let s = p.profile_shape(0.1).unwrap();
        assert_eq!(s.kind, ProfileKind::Pulse);
        assert!((s.amplitude - (4.0f64 / 3.0).sqrt()).abs() < 1e-15 && (s.kappa - 1.0).abs() < 1e-15);
        let none = ReducedOde::elasticity(&ElasticityParams { b1: 1.0, b2: 0.0, w1: 1.0, lambda2: 1.0 }).unwrap();
        assert!(matches!(none.profile_shape(0.1), Err(Error::NoProfile(_))));
        let st = front().truncated_profile(0.1, 0.0).unwrap();
        assert_eq!(st.v_scaled, 0.0);
        assert!((st.w_scaled - (2.0f64 / 3.0).sqrt() * 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fkpp_scaled_system() {
        let ode = ReducedOde::fkpp(&FkppParams::new(1.0, 3.0), 0.860_333_589_019_38).unwrap();
        let s = ode.scaled(0.05).unwrap();
        assert!((s.coefficient(1, 0) + 1.0).abs() < 1e-15);
        assert!((s.coefficient(0, 1) + 3.0).abs() < 1e-15);
        let eq = ode.equilibria(0.05).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0].kind, EquilibriumKind::Sink);
        assert_eq!(eq[1].kind, EquilibriumKind::Saddle);
        assert!((eq[1].v_scaled - 1.0 / s.coefficient(2, 0)).abs() < 1e-13);
        assert!(ode.conserved_scaled(0.05, 0.0, 0.0).is_err());
    }

    #[test]
    fn negative_epsilon_flips_odd_terms() {
        let ode = ReducedOde::fkpp(&FkppParams::new(1.0, 3.0), 0.86).unwrap();
        assert!((ode.scaled(-0.05).unwrap().coefficient(0, 1) - 3.0).abs() < 1e-15);
    }
}
