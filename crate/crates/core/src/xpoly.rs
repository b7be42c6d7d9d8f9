//! Functions `Σₘ xᵐ gₘ(y)` with grid profiles in `y`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::deriv4;
use crate::spectrum::Grid;

/// Polynomial in `x` whose coefficients are profiles on a fixed `y` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XPolyField {
    #[serde(skip)]
    grid: Grid,
    profiles: Vec<Vec<f64>>,
}

impl XPolyField {
    pub fn zero(grid: Grid) -> Self {
        Self { grid, profiles: vec![vec![0.0; grid.n + 1]] }
    }

    /// Builds a field from profiles, dropping identically zero top profiles.
    pub fn new(grid: Grid, profiles: Vec<Vec<f64>>) -> Result<Self> {
        if profiles.iter().any(|p| p.len() != grid.n + 1) {
            return Err(Error::GridMismatch("profile length differs from grid".into()));
        }
        let mut f = Self { grid, profiles };
        if f.profiles.is_empty() {
            f.profiles.push(vec![0.0; grid.n + 1]);
        }
        f.trim(0.0);
        Ok(f)
    }

    /// `xᵐ g(y)` for a single profile.
    pub fn monomial(grid: Grid, m: usize, g: Vec<f64>) -> Result<Self> {
        let mut profiles = vec![vec![0.0; grid.n + 1]; m];
        profiles.push(g);
        Self::new(grid, profiles)
    }

    /// Samples `f(y)` as a degree-zero field.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, m: usize, f: F) -> Self {
        Self::monomial(grid, m, grid.nodes().map(f).collect()).expect("grid-sized profile")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.profiles.len() - 1
    }

    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    /// Profile of `xᵐ`; zero beyond the degree.
    pub fn profile(&self, m: usize) -> Vec<f64> {
        self.profiles.get(m).cloned().unwrap_or_else(|| vec![0.0; self.grid.n + 1])
    }

    pub fn is_zero(&self) -> bool {
        self.profiles.iter().all(|p| p.iter().all(|v| *v == 0.0))
    }

    /// Largest absolute sample over all profiles.
    pub fn max_abs(&self) -> f64 {
        self.profiles.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Drops top profiles whose sup-norm is at most `tol`.
    pub fn trim(&mut self, tol: f64) {
        while self.profiles.len() > 1 && self.profiles.last().unwrap().iter().all(|v| v.abs() <= tol) {
            self.profiles.pop();
        }
    }

    /// Value at `(x, y)` with cubic interpolation in `y`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.profiles.iter().rev().fold(0.0, |acc, g| acc * x + self.grid.interpolate(g, y))
    }

    /// Value at `x` on grid node `i`.
    pub fn eval_node(&self, x: f64, i: usize) -> f64 {
        self.profiles.iter().rev().fold(0.0, |acc, g| acc * x + g[i])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let d = self.degree().max(other.degree());
        let profiles = (0..=d)
            .map(|m| self.profile(m).iter().zip(other.profile(m)).map(|(a, b)| a + b).collect())
            .collect();
        Self::new(self.grid, profiles)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let profiles = self.profiles.iter().map(|p| p.iter().map(|v| v * s).collect()).collect();
        Self::new(self.grid, profiles).expect("same grid")
    }

    /// Product as polynomials in `x`, pointwise in `y`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.grid.n + 1;
        let mut profiles = vec![vec![0.0; n]; self.degree() + other.degree() + 1];
        for (i, a) in self.profiles.iter().enumerate() {
            for (j, b) in other.profiles.iter().enumerate() {
                for k in 0..n {
                    profiles[i + j][k] += a[k] * b[k];
                }
            }
        }
        Self::new(self.grid, profiles)
    }

    /// Multiplies every profile by `w(y)`.
    pub fn mul_profile(&self, w: &[f64]) -> Self {
        let profiles = self.profiles.iter().map(|p| p.iter().zip(w).map(|(a, b)| a * b).collect()).collect();
        Self::new(self.grid, profiles).expect("same grid")
    }

    /// Exact `∂ₓ`.
    pub fn dx(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero(self.grid);
        }
        let profiles = (1..=self.degree())
            .map(|m| self.profiles[m].iter().map(|v| m as f64 * v).collect())
            .collect();
        Self::new(self.grid, profiles).expect("same grid")
    }

    /// `∂_y` by fourth-order differences.
    pub fn dy(&self) -> Self {
        let h = self.grid.h();
        let profiles = self.profiles.iter().map(|p| deriv4(p, h)).collect();
        Self::new(self.grid, profiles).expect("same grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid { y_lo: 0.0, y_hi: 1.0, n: 64 }
    }

    #[test]
    fn product_and_derivative() {
        let g = grid();
        let a = XPolyField::from_fn(g, 1, |y| y);
        let b = XPolyField::from_fn(g, 2, |y| y * y);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.degree(), 3);
        assert!((p.eval(2.0, 0.5) - 8.0 * 0.125).abs() < 1e-14);
        let d = p.dx();
        assert!((d.eval(2.0, 0.5) - 12.0 * 0.125).abs() < 1e-14);
        let dy = p.dy();
        assert!((dy.eval(1.0, 0.5) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn subtraction_trims_to_zero() {
        let g = grid();
        let a = XPolyField::from_fn(g, 3, |y| y.sin());
        let z = a.sub(&a).unwrap();
        assert_eq!(z.degree(), 0);
        assert!(z.is_zero());
    }
}
