//! Anti-plane shear and Fisher–KPP problems: transversal operators and nonlinearities.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{expand_reduction_extrapolated, ApplicationSpec, PsiTable};
use crate::series::{Index, Series};
use crate::spectrum::{critical_parameter, elasticity_family, fkpp_family, BaseOperator, CriticalValue};

/// Anti-plane shear parameters: body force `b₁λ u + b₂u³`, hardening `w₁`, `λ = λ₂ε²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticityParams {
    pub b1: f64,
    pub b2: f64,
    pub w1: f64,
    pub lambda2: f64,
}

impl ElasticityParams {
    /// `w_yy + w` with Dirichlet ends on (−π/2, π/2), evaluated at `y* = 0`.
    pub fn operator(&self, n: usize) -> Result<BaseOperator> {
        elasticity_family(n)(-1.0)
    }

    pub fn b1_lambda2(&self) -> f64 {
        self.b1 * self.lambda2
    }

    /// Closed-form `f₁₀₂ = b₁λ₂`.
    pub fn f102(&self) -> f64 {
        self.b1_lambda2()
    }

    /// Closed-form `f₃₀₀ = 3(b₂ + 2w₁)/4`.
    pub fn f300(&self) -> f64 {
        0.75 * (self.b2 + 2.0 * self.w1)
    }
}

impl ApplicationSpec for ElasticityParams {
    fn weights(&self) -> [u32; 3] {
        [1, 2, 1]
    }

    fn max_weight(&self) -> u32 {
        3
    }

    fn index_set(&self) -> Vec<Index> {
        let mut out = Vec::new();
        for i in 0..=3u8 {
            for j in 0..=1u8 {
                for k in 0..=3u8 {
                    let w = i as u32 + 2 * j as u32 + k as u32;
                    if w <= 3 && i + j + k >= 2 && i + j >= 1 {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }

    /// `b₁λ₂ε²u + b₂u³ − 2w₁[∂ₓ(|∇u|²uₓ) + ∂_y(|∇u|²u_y)]`.
    fn nonlinearity(&self, u: &Series) -> Result<Series> {
        let ux = u.dx()?;
        let uy = u.dy()?;
        let grad2 = ux.mul(&ux)?.add(&uy.mul(&uy)?)?;
        let flux = grad2.mul(&ux)?.dx()?.add(&grad2.mul(&uy)?.dy()?)?;
        let cubic = u.mul(u)?.mul(u)?;
        u.shift_eps(2)?.scale(self.b1_lambda2()).add(&cubic.scale(self.b2))?.add(&flux.scale(-2.0 * self.w1))
    }
}

/// Fisher–KPP parameters: Robin coefficient `β`, speed correction `λ₁`, and `ρ₂` (1 by convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkppParams {
    pub beta: f64,
    pub lambda1: f64,
    #[serde(default = "one")]
    pub rho2: f64,
}

fn one() -> f64 {
    1.0
}

impl FkppParams {
    pub fn new(beta: f64, lambda1: f64) -> Self {
        Self { beta, lambda1, rho2: 1.0 }
    }

    /// Critical `ρ₀` with `ν₀ = 0`, located on grid `n`.
    pub fn critical(&self, n: usize) -> Result<CriticalValue> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        critical_parameter(fkpp_family(self.beta, n), 0.0, FRAC_PI_2)
    }

    /// Transversal operator at `ρ₀`, evaluated at `y* = 0`.
    pub fn operator(&self, rho0: f64, n: usize) -> Result<BaseOperator> {
        fkpp_family(self.beta, n)(rho0)
    }
}

/// `σ = 4 sin ρ₀ (3 − sin² ρ₀) / (3(2ρ₀ + sin 2ρ₀))`.
pub fn fkpp_sigma(rho0: f64) -> f64 {
    let s = rho0.sin();
    4.0 * s * (3.0 - s * s) / (3.0 * (2.0 * rho0 + (2.0 * rho0).sin()))
}

/// Reduction problem for Fisher–KPP at a fixed `ρ₀`.
#[derive(Debug, Clone, Copy)]
pub struct FkppSpec {
    pub params: FkppParams,
    pub rho0: f64,
}

impl ApplicationSpec for FkppSpec {
    fn weights(&self) -> [u32; 3] {
        [2, 3, 1]
    }

    fn max_weight(&self) -> u32 {
        4
    }

    fn index_set(&self) -> Vec<Index> {
        vec![[1, 0, 1], [1, 0, 2], [0, 1, 1], [2, 0, 0]]
    }

    /// `−ρ₂ε²u − λ₁εuₓ + u²`.
    fn nonlinearity(&self, u: &Series) -> Result<Series> {
        let lin = u.shift_eps(2)?.scale(-self.params.rho2);
        let drift = u.dx()?.shift_eps(1)?.scale(-self.params.lambda1);
        lin.add(&drift)?.add(&u.mul(u)?)
    }
}

/// Extrapolated Ψ-table for anti-plane shear on grids `n` and `2n`.
pub fn elasticity_table(params: &ElasticityParams, n: usize, d_max: usize) -> Result<PsiTable> {
    expand_reduction_extrapolated(&params.operator(n)?, params, d_max)
}

/// Extrapolated Ψ-table for Fisher–KPP; returns the critical data as well.
pub fn fkpp_table(params: &FkppParams, n: usize, d_max: usize) -> Result<(CriticalValue, PsiTable)> {
    let crit = params.critical(n)?;
    let spec = FkppSpec { params: *params, rho0: crit.parameter };
    let table = expand_reduction_extrapolated(&params.operator(crit.parameter, n)?, &spec, d_max)?;
    Ok((crit, table))
}
