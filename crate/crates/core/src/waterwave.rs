//! Two-layer bores with constant upper-layer vorticity: parameter presets, admissibility,
//! the conjugate branch and the reduced coefficients `f₃₀₀`, `f₂₀₁`, `f₁₀₂`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::conjugate::{Admissibility, BranchSeries, ConjugateFlows, Fault, Field, Scalar};
use crate::error::{Error, Result};
use crate::reduced::ReducedOde;

/// User-facing parameters; `c0` defaults to the critical Froude number at `h0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterwaveParams {
    pub rho: Scalar,
    pub omega: Scalar,
    #[serde(default = "two_thirds")]
    pub h0: Scalar,
    #[serde(default)]
    pub c0: Option<Scalar>,
}

fn two_thirds() -> Scalar {
    Scalar::ratio(2, 3)
}

/// Shipped parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `ρ = 1`, `h₀ = 2/3`, `ω = −9`, `c₀ = −2ω/9 = 2`.
    Homogeneous,
    /// `ω = 0`, `ρ = 1/4`, `h₀ = 1/(1+√ρ)`, `c₀ = √(1−ρ)/(1+√ρ)`.
    Irrotational,
    /// `ρ = 25/52`, `ω = −9/10`, `h₀ = 2/3`, `c₀ = 1/2`; no critical layer.
    GenericSmooth,
    /// `ρ = 1/28`, `ω = −18`, `h₀ = 2/3`, `c₀ = 1`; critical layer.
    GenericCritical,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Homogeneous, Preset::Irrotational, Preset::GenericSmooth, Preset::GenericCritical];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Homogeneous => "homogeneous",
            Preset::Irrotational => "irrotational",
            Preset::GenericSmooth => "generic-smooth",
            Preset::GenericCritical => "generic-critical",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn params(&self) -> WaterwaveParams {
        let (rho, omega, c0) = match self {
            Preset::Homogeneous => (Scalar::int(1), Scalar::int(-9), Scalar::int(2)),
            Preset::Irrotational => {
                let rho = 0.25f64;
                (Scalar::ratio(1, 4), Scalar::int(0), Scalar::Real((1.0 - rho).sqrt() / (1.0 + rho.sqrt())))
            }
            Preset::GenericSmooth => (Scalar::ratio(25, 52), Scalar::ratio(-9, 10), Scalar::ratio(1, 2)),
            Preset::GenericCritical => (Scalar::ratio(1, 28), Scalar::int(-18), Scalar::int(1)),
        };
        WaterwaveParams { rho, omega, h0: two_thirds(), c0: Some(c0) }
    }
}

/// Reduced coefficients of the bore equation `v'' = f₁₀₂ε²v + f₂₀₁εv² + f₃₀₀v³`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoreCoefficients {
    pub f300: Scalar,
    /// Fixed by requiring the downstream conjugate state to be a rest point on the zero flow-force level.
    pub f201: Scalar,
    pub f102: Scalar,
    pub s020: Scalar,
    /// `a₁ = h₊,₁ − 1 = −2f₂₀₁/(3f₃₀₀)`.
    pub a1: Scalar,
    /// `λ₁² = f₂₀₁²/(18f₃₀₀)`.
    pub lambda1_sq: Scalar,
    /// Diagnostic: the literal closed-form `f₂₀₁` expression in `(h₀, c₀, ρ, ω)`.
    pub f201_closed_form: f64,
    /// Diagnostic: `−2f₂₀₁/f₃₀₀` (without the factor 3).
    pub a1_without_factor_three: f64,
}

/// A fully assembled water-wave configuration.
#[derive(Debug, Clone)]
pub struct WaterwaveModel {
    pub params: WaterwaveParams,
    pub c0: Scalar,
    pub flows: ConjugateFlows,
    pub admissibility: Admissibility,
    pub series: BranchSeries,
    pub coefficients: BoreCoefficients,
}

fn coefficients_generic<T: Field>(h: T, c: T, rho: T, hp1: T) -> Option<[T; 6]> {
    let one = T::from_int(1);
    let mix = rho.clone() + (one.clone() - rho.clone()) * h.clone();
    let om = one.clone() - h.clone();
    let c2 = c.clone() * c;
    let h3 = h.clone() * h.clone() * h.clone();
    let den = c2.clone() * h3.clone() * om.clone() * om * mix.clone();
    if den.is_zero_value() {
        return None;
    }
    let num = (one.clone() - rho) * h3 + c2.clone() * (T::from_int(4) - T::from_int(5) * h);
    let f300 = T::from_int(3) * num / (T::from_int(2) * den);
    let a1 = hp1 - one;
    let f201 = -(T::from_int(3) * f300.clone() * a1.clone() / T::from_int(2));
    let f102 = f300.clone() * a1.clone() * a1.clone() / T::from_int(2);
    let s020 = -(c2 * mix / T::from_int(6));
    let lambda1_sq = f201.clone() * f201.clone() / (T::from_int(18) * f300.clone());
    Some([f300, f201, f102, s020, a1, lambda1_sq])
}

/// The literal closed-form `f₂₀₁(h₀, c₀, ρ, ω)`.
pub fn f201_closed_form(h: f64, c: f64, rho: f64, omega: f64) -> f64 {
    let om = 1.0 - h;
    let num = c * c * (1.0 - h - 2.0 * rho + h.powi(3) * (1.0 - rho).powi(2) + h * h * (4.0 * rho - 1.0))
        - om * om * (3.0 * h * h - 3.0 * h + 2.0) * (1.0 - rho);
    let inner = c * (c * c * h * h + om * (c * c * h + 2.0 * h - 3.0 * c * c)) - omega * om * om * h * (h - c * c);
    let den = c * h * om * om * (rho + (1.0 - rho) * h) * inner;
    4.5 * num / den
}

impl WaterwaveModel {
    pub fn from_preset(preset: Preset) -> Result<Self> {
        Self::new(preset.params(), Fault::None)
    }

    /// Validates admissibility, expands the conjugate branch and assembles the coefficients.
    pub fn new(params: WaterwaveParams, fault: Fault) -> Result<Self> {
        let h = params.h0.to_f64();
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("h0 must lie in (0, 1), got {}", params.h0)));
        }
        let flows = ConjugateFlows::with_fault(params.rho.clone(), params.omega.clone(), fault)?;
        let c0 = match &params.c0 {
            Some(c) => c.clone(),
            None => flows.critical_froude(&params.h0)?,
        };
        let admissibility = flows.admissibility(&params.h0, &c0);
        if !admissibility.admissible {
            return Err(Error::DegenerateParameters(format!("inadmissible base point: {admissibility:?}")));
        }
        let series = flows.branch_expand(&params.h0, &c0)?;
        let exact = match (params.h0.exact(), c0.exact(), params.rho.exact(), series.hp1.exact()) {
            (Some(h), Some(c), Some(r), Some(p)) => {
                coefficients_generic::<BigRational>(h.clone(), c.clone(), r.clone(), p.clone()).map(|v| v.map(Scalar::Exact))
            }
            _ => None,
        };
        let [f300, f201, f102, s020, a1, lambda1_sq] = match exact {
            Some(v) => v,
            None => coefficients_generic(h, c0.to_f64(), params.rho.to_f64(), series.hp1.to_f64())
                .map(|v| v.map(Scalar::Real))
                .ok_or_else(|| Error::DegenerateParameters("vanishing denominator in f300".into()))?,
        };
        let f201_cf = f201_closed_form(h, c0.to_f64(), params.rho.to_f64(), params.omega.to_f64());
        let coefficients = BoreCoefficients {
            a1_without_factor_three: -2.0 * f201.to_f64() / f300.to_f64(),
            f300,
            f201,
            f102,
            s020,
            a1,
            lambda1_sq,
            f201_closed_form: f201_cf,
        };
        Ok(Self { params, c0, flows, admissibility, series, coefficients })
    }

    /// The truncated reduced equation.
    pub fn reduced_ode(&self) -> Result<ReducedOde> {
        let c = &self.coefficients;
        ReducedOde::waterwave(c.f102.to_f64(), c.f201.to_f64(), c.f300.to_f64(), c.s020.to_f64())
    }

    pub fn rho(&self) -> f64 {
        self.params.rho.to_f64()
    }

    pub fn omega(&self) -> f64 {
        self.params.omega.to_f64()
    }

    pub fn h0(&self) -> f64 {
        self.params.h0.to_f64()
    }
}
