//! Transversal Sturm–Liouville operator `L'w = (a w')' + (b' + c) w` on an interval.
//!
//! Discretization is a vertex-centred finite-volume scheme (second order, ghost-point
//! equivalent at Robin/Neumann ends). The matrix is symmetrized with trapezoid weights
//! and solved by Sturm bisection plus inverse iteration.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{brent, deriv4, gregory_weights, interp_cubic};
use crate::tridiag::{kth_largest, TriLu};

/// Boundary condition at one endpoint. Robin(β) means `a ∂_N w + N b w + β w = 0`
/// with `N` the outward normal; Neumann is Robin(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Robin(f64),
}

impl Boundary {
    fn robin(self) -> Option<f64> {
        match self {
            Boundary::Dirichlet => None,
            Boundary::Neumann => Some(0.0),
            Boundary::Robin(beta) => Some(beta),
        }
    }
}

/// A coefficient profile on the base interval.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Monomial coefficients in `y`, lowest degree first.
    Polynomial(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Samples on the operator grid; cannot be regridded.
    Sampled(Vec<f64>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(v) => write!(f, "Constant({v})"),
            Coefficient::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
            Coefficient::Sampled(s) => write!(f, "Sampled({} values)", s.len()),
        }
    }
}

impl Coefficient {
    pub fn function<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    fn value(&self, y: f64, grid: &Grid) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * y + ci),
            Coefficient::Function(f) => f(y),
            Coefficient::Sampled(s) => interp_cubic(grid.y_lo, grid.h(), s, y),
        }
    }

    fn derivative_on(&self, grid: &Grid) -> Vec<f64> {
        match self {
            Coefficient::Constant(_) => vec![0.0; grid.n + 1],
            Coefficient::Polynomial(c) => grid
                .nodes()
                .map(|y| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * y + k as f64 * ck))
                .collect(),
            Coefficient::Function(f) => {
                let d = 1e-4 * (grid.y_hi - grid.y_lo);
                grid.nodes()
                    .map(|y| (-f(y + 2.0 * d) + 8.0 * f(y + d) - 8.0 * f(y - d) + f(y - 2.0 * d)) / (12.0 * d))
                    .collect()
            }
            Coefficient::Sampled(s) => deriv4(s, grid.h()),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Constant(v) => *v == 0.0,
            Coefficient::Polynomial(c) => c.iter().all(|v| *v == 0.0),
            Coefficient::Sampled(s) => s.iter().all(|v| *v == 0.0),
            Coefficient::Function(_) => false,
        }
    }
}

/// Uniform vertex grid `y_i = y_lo + i h`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub y_lo: f64,
    pub y_hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn h(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.y_hi
        } else {
            self.y_lo + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.node(i))
    }

    /// Trapezoid weights on all nodes.
    pub fn trapezoid(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n + 1];
        w[0] = 0.5 * h;
        w[self.n] = 0.5 * h;
        w
    }

    /// Trapezoid inner product.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.trapezoid().iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w * a * b).sum()
    }

    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        interp_cubic(self.y_lo, self.h(), values, y)
    }
}

/// Coefficients and boundary conditions of the transversal operator.
#[derive(Debug, Clone)]
pub struct BaseOperator {
    grid: Grid,
    a: Coefficient,
    b: Coefficient,
    c: Coefficient,
    lo: Boundary,
    hi: Boundary,
    eval_point: f64,
}

/// Assembled discrete operator restricted to the unknown nodes.
#[derive(Debug, Clone)]
pub struct Discrete {
    /// First and last unknown node index.
    pub first: usize,
    pub last: usize,
    /// `A = W⁻¹K` bands.
    pub dl: Vec<f64>,
    pub d: Vec<f64>,
    pub du: Vec<f64>,
    /// Symmetric form `W^{-1/2} K W^{-1/2}`.
    pub sd: Vec<f64>,
    pub se: Vec<f64>,
    /// Finite-volume weights on the unknowns.
    pub w: Vec<f64>,
    a_half: Vec<f64>,
    c_eff: Vec<f64>,
    gamma_lo: Option<f64>,
    gamma_hi: Option<f64>,
}

impl Discrete {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// `A w` on the unknowns for a full-grid vector.
    pub fn apply(&self, full: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|k| {
                let i = self.first + k;
                let mut s = self.d[k] * full[i];
                if k > 0 {
                    s += self.dl[k - 1] * full[i - 1];
                }
                if k + 1 < m {
                    s += self.du[k] * full[i + 1];
                }
                s
            })
            .collect()
    }

    /// Infinity norm of `A`.
    pub fn norm_inf(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|k| {
                self.d[k].abs()
                    + if k > 0 { self.dl[k - 1].abs() } else { 0.0 }
                    + if k + 1 < m { self.du[k].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// Discrete energy quotient `wᵀKw / wᵀWw` for a full-grid vector.
    pub fn energy_quotient(&self, full: &[f64], h: f64) -> f64 {
        let n = full.len() - 1;
        let mut num = 0.0;
        for i in 0..n {
            let dw = full[i + 1] - full[i];
            num -= self.a_half[i] * dw * dw / h;
        }
        let mut den = 0.0;
        for (k, wk) in self.w.iter().enumerate() {
            let v = full[self.first + k];
            num += wk * self.c_eff[self.first + k] * v * v;
            den += wk * v * v;
        }
        if let Some(g) = self.gamma_lo {
            num -= g * full[0] * full[0];
        }
        if let Some(g) = self.gamma_hi {
            num -= g * full[n] * full[n];
        }
        num / den
    }

    /// Factors `A - shift I`.
    pub fn factor_shifted(&self, shift: f64) -> Result<TriLu> {
        let d: Vec<f64> = self.d.iter().map(|v| v - shift).collect();
        TriLu::new(&self.dl, &d, &self.du)
    }
}

/// One eigenvalue with its grid eigenfunction.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    /// Reported eigenvalue (Richardson-extrapolated when the operator can be regridded).
    pub value: f64,
    /// Eigenvalue of the discrete operator on this grid.
    pub discrete_value: f64,
    /// Eigenfunction on all grid nodes, trapezoid-normalized.
    pub vector: Vec<f64>,
    /// `‖Aφ − ν_h φ‖∞ / (‖A‖∞ ‖φ‖∞)`.
    pub residual: f64,
}

/// Critical parameter together with the spectrum at that parameter.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalValue {
    pub parameter: f64,
    pub nu0: f64,
    pub nu1: f64,
}

/// Default relative eigen residual tolerance.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
/// Default bracket width for critical parameters.
pub const ROOT_BRACKET_TOL: f64 = 1e-12;

impl BaseOperator {
    /// Validates and builds an operator; `a` must be uniformly positive on the grid.
    pub fn new(
        grid: Grid,
        a: Coefficient,
        b: Coefficient,
        c: Coefficient,
        lo: Boundary,
        hi: Boundary,
    ) -> Result<Self> {
        if !(grid.y_lo < grid.y_hi) {
            return Err(Error::InvalidOperator(format!("y_lo = {} must be below y_hi = {}", grid.y_lo, grid.y_hi)));
        }
        if grid.n < 16 {
            return Err(Error::InvalidOperator(format!("grid size {} below 16", grid.n)));
        }
        for coef in [&a, &b, &c] {
            if let Coefficient::Sampled(s) = coef {
                if s.len() != grid.n + 1 {
                    return Err(Error::InvalidOperator(format!("sampled coefficient has {} values, grid has {}", s.len(), grid.n + 1)));
                }
            }
        }
        let op = Self { grid, a, b, c, lo, hi, eval_point: 0.5 * (grid.y_lo + grid.y_hi) };
        let h = grid.h();
        let theta = (0..=2 * grid.n)
            .map(|k| op.a.value(grid.y_lo + 0.5 * k as f64 * h, &grid))
            .fold(f64::INFINITY, f64::min);
        if !(theta > 0.0) {
            return Err(Error::InvalidOperator(format!("a'(y) not uniformly positive (min {theta})")));
        }
        if op.c_eff().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator("non-finite coefficient".into()));
        }
        Ok(op)
    }

    /// `(a w')' + c w` with constant `a` and `c`, `b = 0`.
    pub fn constant(y_lo: f64, y_hi: f64, n: usize, a: f64, c: f64, lo: Boundary, hi: Boundary) -> Result<Self> {
        Self::new(Grid { y_lo, y_hi, n }, Coefficient::Constant(a), Coefficient::Constant(0.0), Coefficient::Constant(c), lo, hi)
    }

    /// Sets the evaluation point `y*` used for sign fixing and point conditions.
    pub fn with_eval_point(mut self, y: f64) -> Result<Self> {
        if y < self.grid.y_lo || y > self.grid.y_hi {
            return Err(Error::InvalidOperator(format!("evaluation point {y} outside the interval")));
        }
        self.eval_point = y;
        Ok(self)
    }

    /// Same operator on a grid with `n` intervals.
    pub fn with_grid(&self, n: usize) -> Result<Self> {
        for coef in [&self.a, &self.b, &self.c] {
            if matches!(coef, Coefficient::Sampled(_)) {
                return Err(Error::InvalidOperator("sampled coefficients cannot be regridded".into()));
            }
        }
        let grid = Grid { n, ..self.grid };
        Self::new(grid, self.a.clone(), self.b.clone(), self.c.clone(), self.lo, self.hi)?.with_eval_point(self.eval_point)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn eval_point(&self) -> f64 {
        self.eval_point
    }

    pub fn boundaries(&self) -> (Boundary, Boundary) {
        (self.lo, self.hi)
    }

    /// Whether the coefficients allow regridding (and hence extrapolation).
    pub fn refinable(&self) -> bool {
        ![&self.a, &self.b, &self.c].iter().any(|c| matches!(c, Coefficient::Sampled(_)))
    }

    fn c_eff(&self) -> Vec<f64> {
        let db = self.b.derivative_on(&self.grid);
        self.grid.nodes().zip(db).map(|(y, dbi)| self.c.value(y, &self.grid) + dbi).collect()
    }

    /// Assembles the discrete operator.
    pub fn discretize(&self) -> Discrete {
        let g = self.grid;
        let n = g.n;
        let h = g.h();
        let a_half: Vec<f64> = (0..n).map(|i| self.a.value(g.y_lo + (i as f64 + 0.5) * h, &g)).collect();
        let c_eff = self.c_eff();
        let b_zero = self.b.is_zero();
        let gamma_lo = self.lo.robin().map(|beta| beta - if b_zero { 0.0 } else { self.b.value(g.y_lo, &g) });
        let gamma_hi = self.hi.robin().map(|beta| beta + if b_zero { 0.0 } else { self.b.value(g.y_hi, &g) });
        let first = if gamma_lo.is_some() { 0 } else { 1 };
        let last = if gamma_hi.is_some() { n } else { n - 1 };
        let m = last - first + 1;
        let mut kd = vec![0.0; m];
        let mut ke = vec![0.0; m - 1];
        let mut w = vec![h; m];
        for k in 0..m {
            let i = first + k;
            let left = if i > 0 { a_half[i - 1] / h } else { 0.0 };
            let right = if i < n { a_half[i] / h } else { 0.0 };
            if i == 0 || i == n {
                w[k] = 0.5 * h;
            }
            kd[k] = -(left + right) + w[k] * c_eff[i];
            if i == 0 {
                kd[k] -= gamma_lo.unwrap_or(0.0);
            }
            if i == n {
                kd[k] -= gamma_hi.unwrap_or(0.0);
            }
            if k + 1 < m {
                ke[k] = right;
            }
        }
        let d: Vec<f64> = kd.iter().zip(&w).map(|(k, wk)| k / wk).collect();
        let du: Vec<f64> = (0..m - 1).map(|k| ke[k] / w[k]).collect();
        let dl: Vec<f64> = (0..m - 1).map(|k| ke[k] / w[k + 1]).collect();
        let se: Vec<f64> = (0..m - 1).map(|k| ke[k] / (w[k] * w[k + 1]).sqrt()).collect();
        Discrete { first, last, dl, d: d.clone(), du, sd: d, se, w, a_half, c_eff, gamma_lo, gamma_hi }
    }

    /// Eigenpairs of the discrete operator on this grid, largest first.
    pub fn eigen_discrete(&self, count: usize) -> Result<Vec<EigenPair>> {
        let disc = self.discretize();
        let m = disc.len();
        if count == 0 || count > m {
            return Err(Error::InvalidOperator(format!("requested {count} eigenpairs from {m} unknowns")));
        }
        let norm = disc.norm_inf().max(1.0);
        let sqrt_w: Vec<f64> = disc.w.iter().map(|v| v.sqrt()).collect();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut pairs = Vec::with_capacity(count);
        for k in 0..count {
            let lambda = kth_largest(&disc.sd, &disc.se, k);
            let mut shift = lambda;
            let lu = loop {
                let d: Vec<f64> = disc.sd.iter().map(|v| v - shift).collect();
                match TriLu::new(&disc.se, &d, &disc.se) {
                    Ok(lu) => break lu,
                    Err(_) => shift += 1e-13 * norm,
                }
            };
            let mut x: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.7 + k as f64).sin()).collect();
            for _ in 0..4 {
                x = lu.solve(&x);
                for q in &basis {
                    let p: f64 = q.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= p * qi);
                }
                let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= nx);
            }
            basis.push(x.clone());
            let mut full = vec![0.0; self.grid.n + 1];
            for (kk, xi) in x.iter().enumerate() {
                full[disc.first + kk] = xi / sqrt_w[kk];
            }
            let nrm = self.grid.dot(&full, &full).sqrt();
            full.iter_mut().for_each(|v| *v /= nrm);
            self.fix_sign(&mut full, k);
            let nu = disc.energy_quotient(&full, self.grid.h());
            let av = disc.apply(&full);
            let res = av
                .iter()
                .enumerate()
                .map(|(kk, v)| (v - nu * full[disc.first + kk]).abs())
                .fold(0.0, f64::max);
            let fmax = full.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let residual = res / (norm * fmax);
            if !(residual <= EIGEN_RESIDUAL_TOL) {
                return Err(Error::EigenNonConvergence { residual });
            }
            pairs.push(EigenPair { value: nu, discrete_value: nu, vector: full, residual });
        }
        Ok(pairs)
    }

    fn fix_sign(&self, v: &mut [f64], k: usize) {
        let vmax = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let sign = if k == 0 {
            let at = self.grid.interpolate(v, self.eval_point);
            if at.abs() > 1e-8 * vmax {
                at.signum()
            } else {
                v.iter().sum::<f64>().signum()
            }
        } else {
            v.iter().find(|x| x.abs() > 1e-3 * vmax).map(|x| x.signum()).unwrap_or(1.0)
        };
        if sign < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }

    /// The `count` largest eigenvalues with normalized eigenfunctions on this grid.
    /// Eigenvalues are Richardson-extrapolated from grids n and 2n when possible.
    pub fn eigen_lowest(&self, count: usize) -> Result<Vec<EigenPair>> {
        let mut coarse = self.eigen_discrete(count)?;
        if !self.refinable() {
            return Ok(coarse);
        }
        let fine = self.with_grid(2 * self.grid.n)?.eigen_discrete(count)?;
        for (c, f) in coarse.iter_mut().zip(&fine) {
            c.value = (4.0 * f.discrete_value - c.discrete_value) / 3.0;
        }
        Ok(coarse)
    }

    /// Rayleigh quotient with fourth-order derivative and quadrature.
    pub fn rayleigh(&self, w: &[f64]) -> Result<f64> {
        let g = self.grid;
        if w.len() != g.n + 1 {
            return Err(Error::GridMismatch(format!("profile has {} values, grid has {}", w.len(), g.n + 1)));
        }
        let h = g.h();
        let q = gregory_weights(g.n, h);
        let den: f64 = q.iter().zip(w).map(|(qi, wi)| qi * wi * wi).sum();
        if !(den > 0.0) {
            return Err(Error::ZeroProfile);
        }
        let dw = deriv4(w, h);
        let c_eff = self.c_eff();
        let mut num = 0.0;
        for i in 0..=g.n {
            let a = self.a.value(g.node(i), &g);
            num += q[i] * (-a * dw[i] * dw[i] + c_eff[i] * w[i] * w[i]);
        }
        let disc = self.discretize();
        if let Some(gl) = disc.gamma_lo {
            num -= gl * w[0] * w[0];
        }
        if let Some(gh) = disc.gamma_hi {
            num -= gh * w[g.n] * w[g.n];
        }
        Ok(num / den)
    }

    /// CSV with columns y, φ₀, φ₁, … and an eigenvalue row under the header.
    pub fn eigen_csv(&self, pairs: &[EigenPair]) -> String {
        let mut out = String::from("y");
        for k in 0..pairs.len() {
            out.push_str(&format!(",phi{k}"));
        }
        out.push_str("\neigenvalue");
        for p in pairs {
            out.push_str(&format!(",{:.16e}", p.value));
        }
        out.push('\n');
        for (i, y) in self.grid.nodes().enumerate() {
            out.push_str(&format!("{y:.16e}"));
            for p in pairs {
                out.push_str(&format!(",{:.16e}", p.vector[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Locates `p*` with `ν₀(p*) = 0` on `[lo, hi]` and verifies `ν₁(p*) < 0`.
pub fn critical_parameter<F>(family: F, lo: f64, hi: f64) -> Result<CriticalValue>
where
    F: Fn(f64) -> Result<BaseOperator>,
{
    let nu0 = |p: f64| -> Result<f64> { Ok(family(p)?.eigen_lowest(1)?[0].value) };
    let (f_lo, f_hi) = (nu0(lo)?, nu0(hi)?);
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(Error::NoCriticalValue { lo, hi });
    }
    let p = brent(nu0, lo, hi, ROOT_BRACKET_TOL)?;
    let pairs = family(p)?.eigen_lowest(2)?;
    let (n0, n1) = (pairs[0].value, pairs[1].value);
    if n1.abs() < 1e-6 {
        return Err(Error::SimplicityViolated { nu0: n0, nu1: n1 });
    }
    Ok(CriticalValue { parameter: p, nu0: n0, nu1: n1 })
}

/// FKPP transversal family `w'' + ρ² w` on (0, 1): Neumann at 0, Robin(β) at 1.
pub fn fkpp_family(beta: f64, n: usize) -> impl Fn(f64) -> Result<BaseOperator> {
    move |rho| BaseOperator::constant(0.0, 1.0, n, 1.0, rho * rho, Boundary::Neumann, Boundary::Robin(beta))?.with_eval_point(0.0)
}

/// Elasticity family `w'' − s w`, Dirichlet on (−π/2, π/2).
pub fn elasticity_family(n: usize) -> impl Fn(f64) -> Result<BaseOperator> {
    use std::f64::consts::FRAC_PI_2;
    move |s| BaseOperator::constant(-FRAC_PI_2, FRAC_PI_2, n, 1.0, -s, Boundary::Dirichlet, Boundary::Dirichlet)?.with_eval_point(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn elasticity(n: usize) -> BaseOperator {
        elasticity_family(n)(-1.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_a() {
        let r = BaseOperator::constant(0.0, 1.0, 32, -1.0, 0.0, Boundary::Dirichlet, Boundary::Dirichlet);
        assert!(matches!(r, Err(Error::InvalidOperator(_))));
    }

    #[test]
    fn rejects_small_grid() {
        assert!(BaseOperator::constant(0.0, 1.0, 8, 1.0, 0.0, Boundary::Dirichlet, Boundary::Dirichlet).is_err());
    }

    #[test]
    fn elasticity_spectrum() {
        let pairs = elasticity(256).eigen_lowest(3).unwrap();
        assert!(pairs[0].value.abs() < 1e-8);
        assert!((pairs[1].value + 3.0).abs() < 1e-6);
        assert!((pairs[2].value + 8.0).abs() < 1e-5);
        let g = elasticity(256).grid();
        let scale = pairs[0].vector[128];
        for (i, y) in g.nodes().enumerate() {
            assert!((pairs[0].vector[i] / scale - y.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_laplacian_on_zero_pi() {
        let op = BaseOperator::constant(0.0, PI, 128, 1.0, 0.0, Boundary::Dirichlet, Boundary::Dirichlet).unwrap();
        let p = op.eigen_lowest(1).unwrap();
        assert!((p[0].value + 1.0).abs() < 1e-9);
        assert!(p[0].vector[64] > 0.0);
    }

    #[test]
    fn eigenfunctions_orthonormal() {
        let op = fkpp_family(1.0, 200)(0.9).unwrap();
        let pairs = op.eigen_discrete(4).unwrap();
        let g = op.grid();
        for j in 0..4 {
            for k in 0..4 {
                let ip = g.dot(&pairs[j].vector, &pairs[k].vector);
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-10, "{j} {k} {ip}");
            }
        }
    }

    #[test]
    fn rayleigh_of_mixture() {
        let op = elasticity(512);
        let p = op.eigen_lowest(2).unwrap();
        let mix: Vec<f64> = p[0].vector.iter().zip(&p[1].vector).map(|(a, b)| a + b).collect();
        let r = op.rayleigh(&mix).unwrap();
        assert!((r - (p[0].value + p[1].value) / 2.0).abs() < 1e-6);
        assert!(op.rayleigh(&vec![0.0; 513]).is_err());
    }

    #[test]
    fn second_order_convergence() {
        let op = fkpp_family(1.0, 64)(1.1).unwrap();
        let nus: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| op.with_grid(n).unwrap().eigen_discrete(1).unwrap()[0].discrete_value)
            .collect();
        let order = ((nus[0] - nus[1]) / (nus[1] - nus[2])).abs().log2();
        assert!(order > 1.9, "observed order {order}");
    }

    #[test]
    fn variable_coefficient_matches_transformed_problem() {
        // (e^{2y} w')' on (0, 1) with Dirichlet ends; w = e^{-y} v turns it into v'' - v = ν v.
        let op = BaseOperator::new(
            Grid { y_lo: 0.0, y_hi: 1.0, n: 256 },
            Coefficient::function(|y: f64| (2.0 * y).exp()),
            Coefficient::Constant(0.0),
            Coefficient::Constant(0.0),
            Boundary::Dirichlet,
            Boundary::Dirichlet,
        )
        .unwrap();
        let nu = op.eigen_lowest(1).unwrap()[0].value;
        // Weighted problem: eigenvalue of (e^{2y} w')' = ν e^{0} w is not closed form; check against refinement.
        let fine = op.with_grid(1024).unwrap().eigen_lowest(1).unwrap()[0].value;
        assert!((nu - fine).abs() < 1e-7);
        let _ = FRAC_PI_2;
    }
}
