//! Linear hierarchy `L Ψ = F` with `L = ∂ₓ² + L'` and the point conditions
//! `Ψ(0, y*) = ∂ₓΨ(0, y*) = 0`, solved degree by degree in `x`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::series::{Index, Series};
use crate::spectrum::{BaseOperator, Discrete, Grid};
use crate::tridiag::TriLu;
use crate::xpoly::XPolyField;

/// Default maximal `x`-degree of solved fields.
pub const DEFAULT_D_MAX: usize = 6;

/// Result of one transverse solve.
#[derive(Debug, Clone)]
pub struct TransverseSolution {
    /// Solution on the full grid.
    pub g: Vec<f64>,
    /// Constant `s` with `L'g = h − s φ₀`.
    pub solvability: f64,
}

/// Factored transverse operator with its kernel direction `φ₀`, normalized `φ₀(y*) = 1`.
#[derive(Debug, Clone)]
pub struct BorderedSolver {
    op: BaseOperator,
    disc: Discrete,
    lu: TriLu,
    shift: f64,
    phi0: Vec<f64>,
    phi0_norm2: f64,
    nu0: f64,
    norm_a: f64,
    d_max: usize,
}

impl BorderedSolver {
    pub fn new(op: &BaseOperator) -> Result<Self> {
        Self::with_d_max(op, DEFAULT_D_MAX)
    }

    pub fn with_d_max(op: &BaseOperator, d_max: usize) -> Result<Self> {
        let disc = op.discretize();
        let pairs = op.eigen_discrete(2)?;
        let grid = op.grid();
        let at = grid.interpolate(&pairs[0].vector, op.eval_point());
        let vmax = pairs[0].vector.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if at.abs() < 1e-6 * vmax {
            return Err(Error::InvalidOperator("kernel eigenfunction vanishes at the evaluation point".into()));
        }
        let phi0: Vec<f64> = pairs[0].vector.iter().map(|v| v / at).collect();
        let phi0_norm2 = grid.dot(&phi0, &phi0);
        let nu0 = pairs[0].discrete_value;
        let nu1 = pairs[1].discrete_value;
        let norm_a = disc.norm_inf().max(1.0);
        let direct = if nu0.abs() >= 1e-12 * norm_a { disc.factor_shifted(0.0).ok() } else { None };
        let (lu, shift) = match direct {
            Some(lu) => (lu, 0.0),
            None => {
                let s = 1e-3 * (nu0 - nu1);
                (disc.factor_shifted(s)?, s)
            }
        };
        Ok(Self { op: op.clone(), disc, lu, shift, phi0, phi0_norm2, nu0, norm_a, d_max })
    }

    pub fn operator(&self) -> &BaseOperator {
        &self.op
    }

    pub fn grid(&self) -> Grid {
        self.op.grid()
    }

    pub fn eval_point(&self) -> f64 {
        self.op.eval_point()
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Kernel eigenfunction with `φ₀(y*) = 1`.
    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    /// Trapezoid projection coefficient `⟨f, φ₀⟩ / ⟨φ₀, φ₀⟩`.
    pub fn kernel_component(&self, f: &[f64]) -> f64 {
        self.grid().dot(f, &self.phi0) / self.phi0_norm2
    }

    fn restrict(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        out[self.disc.first..=self.disc.last].copy_from_slice(&f[self.disc.first..=self.disc.last]);
        out
    }

    fn project(&self, f: &mut [f64]) {
        let k = self.kernel_component(f);
        f.iter_mut().zip(&self.phi0).for_each(|(v, p)| *v -= k * p);
    }

    /// Kernel-corrected operator `Ã = L'_h − ν₀ φ₀⟨φ₀, ·⟩/‖φ₀‖²` on the full grid, zero at Dirichlet nodes.
    pub fn apply_tilde(&self, g: &[f64]) -> Vec<f64> {
        let k = self.nu0 * self.kernel_component(g);
        let ag = self.disc.apply(g);
        let mut out = vec![0.0; g.len()];
        for (j, v) in ag.iter().enumerate() {
            let i = self.disc.first + j;
            out[i] = v - k * self.phi0[i];
        }
        out
    }

    /// Solves `Ã g = h − sφ₀` with `⟨g, φ₀⟩ = kernel_value · ‖φ₀‖²`.
    pub fn solve_transverse(&self, h: &[f64], kernel_value: f64) -> Result<TransverseSolution> {
        let n1 = self.grid().n + 1;
        if h.len() != n1 {
            return Err(Error::GridMismatch(format!("profile has {} values, grid has {n1}", h.len())));
        }
        let mut hp = self.restrict(h);
        let solvability = self.kernel_component(&hp);
        self.project(&mut hp);
        let (first, last) = (self.disc.first, self.disc.last);
        let solve = |r: &[f64]| -> Vec<f64> {
            let x = self.lu.solve(&r[first..=last]);
            let mut full = vec![0.0; n1];
            full[first..=last].copy_from_slice(&x);
            self.project(&mut full);
            full
        };
        let mut g = solve(&hp);
        let residual = |g: &[f64]| -> (Vec<f64>, f64) {
            let ag = self.apply_tilde(g);
            let r: Vec<f64> = hp.iter().zip(&ag).map(|(a, b)| a - b).collect();
            let m = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            (r, m)
        };
        let (mut r, mut rn) = residual(&g);
        let iterations = if self.shift == 0.0 { 2 } else { 40 };
        for _ in 0..iterations {
            let mut rp = r.clone();
            self.project(&mut rp);
            let dg = solve(&rp);
            let trial: Vec<f64> = g.iter().zip(&dg).map(|(a, b)| a + b).collect();
            let (tr, tn) = residual(&trial);
            if tn >= rn {
                break;
            }
            g = trial;
            r = tr;
            rn = tn;
        }
        let hmax = hp.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !(rn <= 1e-10 * (hmax + self.norm_a * gmax) + 1e-300) {
            return Err(Error::InconsistentSystem { residual: rn });
        }
        g.iter_mut().zip(&self.phi0).for_each(|(v, p)| *v += kernel_value * p);
        Ok(TransverseSolution { g, solvability })
    }

    /// Degree-wise image `(LΨ)ₘ = Ã gₘ + (m+1)(m+2) g_{m+2}`.
    pub fn apply_l(&self, field: &XPolyField) -> Result<XPolyField> {
        if field.grid() != self.grid() {
            return Err(Error::GridMismatch("field and operator grids differ".into()));
        }
        let d = field.degree();
        let profiles = (0..=d)
            .map(|m| {
                let mut out = self.apply_tilde(&field.profile(m));
                let c = ((m + 1) * (m + 2)) as f64;
                let up = self.restrict(&field.profile(m + 2));
                out.iter_mut().zip(up).for_each(|(o, u)| *o += c * u);
                out
            })
            .collect();
        XPolyField::new(self.grid(), profiles)
    }

    /// Solves `LΨ = rhs` with `Ψ(0, y*) = ∂ₓΨ(0, y*) = 0`.
    pub fn solve_bordered(&self, rhs: &XPolyField) -> Result<XPolyField> {
        let grid = self.grid();
        if rhs.grid() != grid {
            return Err(Error::GridMismatch("rhs and operator grids differ".into()));
        }
        let scale = rhs.max_abs();
        let mut rhs = rhs.clone();
        rhs.trim(1e-12 * scale);
        if rhs.is_zero() {
            return Ok(XPolyField::zero(grid));
        }
        let d = rhs.degree();
        if d + 2 > self.d_max {
            return Err(Error::DegreeOverflow { needed: d + 2, d_max: self.d_max });
        }
        let n1 = grid.n + 1;
        let mut g = vec![vec![0.0; n1]; d + 3];
        for m in (0..=d).rev() {
            let c = ((m + 1) * (m + 2)) as f64;
            let h = self.restrict(&rhs.profile(m));
            let kappa = self.kernel_component(&h) / c;
            g[m + 2].iter_mut().zip(&self.phi0).for_each(|(v, p)| *v += kappa * p);
            let rhs_m: Vec<f64> = h.iter().zip(self.restrict(&g[m + 2])).map(|(a, b)| a - c * b).collect();
            g[m] = self.solve_transverse(&rhs_m, 0.0)?.g;
        }
        let y_star = self.eval_point();
        for m in 0..2 {
            let k = -grid.interpolate(&g[m], y_star);
            g[m].iter_mut().zip(&self.phi0).for_each(|(v, p)| *v += k * p);
        }
        let mut out = XPolyField::new(grid, g)?;
        out.trim(1e-13 * scale.max(out.max_abs()));
        Ok(out)
    }
}

/// `∂ₓ²Ψ(0, y*) = 2 g₂(y*)`.
pub fn reduced_coefficient(psi: &XPolyField, y_star: f64) -> f64 {
    2.0 * psi.grid().interpolate(&psi.profile(2), y_star)
}

/// Problem data for the reduction: the nonlinearity `F(u)` on truncated series.
pub trait ApplicationSpec {
    /// Weights of `(A, B, ε)` in the truncation.
    fn weights(&self) -> [u32; 3];
    /// Largest weighted degree kept.
    fn max_weight(&self) -> u32;
    /// Index set 𝒥 of coefficients to solve for.
    fn index_set(&self) -> Vec<Index>;
    /// Nonlinear part `F(u)` such that `L u = F(u)`.
    fn nonlinearity(&self, u: &Series) -> Result<Series>;
}

/// Solved coefficients `Ψ_ijk` of the reduction map.
#[derive(Debug, Clone)]
pub struct PsiTable {
    grid: Grid,
    y_star: f64,
    entries: BTreeMap<Index, XPolyField>,
}

impl PsiTable {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn eval_point(&self) -> f64 {
        self.y_star
    }

    pub fn get(&self, idx: Index) -> Option<&XPolyField> {
        self.entries.get(&idx)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Index, &XPolyField)> {
        self.entries.iter()
    }

    /// `f_ijk = ∂ₓ²Ψ_ijk(0, y*)`.
    pub fn coefficient(&self, idx: Index) -> f64 {
        self.entries.get(&idx).map(|p| reduced_coefficient(p, self.y_star)).unwrap_or(0.0)
    }

    /// Largest `|Ψ(0,y*)| + |∂ₓΨ(0,y*)|` over all entries.
    pub fn point_residual(&self) -> f64 {
        self.entries
            .values()
            .map(|p| {
                let g = self.grid;
                g.interpolate(&p.profile(0), self.y_star).abs() + g.interpolate(&p.profile(1), self.y_star).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Combines tables on grids `n` and `2n` as `(4 Ψ_{2n} − Ψ_n)/3` on the coarse nodes.
    pub fn richardson(coarse: &PsiTable, fine: &PsiTable) -> Result<PsiTable> {
        let (gc, gf) = (coarse.grid, fine.grid);
        if gf.n != 2 * gc.n || gf.y_lo != gc.y_lo || gf.y_hi != gc.y_hi {
            return Err(Error::GridMismatch("fine table must use the doubled grid".into()));
        }
        let keys: BTreeSet<Index> = coarse.entries.keys().chain(fine.entries.keys()).copied().collect();
        let mut entries = BTreeMap::new();
        for idx in keys {
            let c = coarse.entries.get(&idx).cloned().unwrap_or_else(|| XPolyField::zero(gc));
            let f = fine.entries.get(&idx).cloned().unwrap_or_else(|| XPolyField::zero(gf));
            let d = c.degree().max(f.degree());
            let profiles = (0..=d)
                .map(|m| {
                    let (pc, pf) = (c.profile(m), f.profile(m));
                    (0..=gc.n).map(|i| (4.0 * pf[2 * i] - pc[i]) / 3.0).collect()
                })
                .collect();
            entries.insert(idx, XPolyField::new(gc, profiles)?);
        }
        Ok(PsiTable { grid: gc, y_star: coarse.y_star, entries })
    }

    /// `{"i,j,k": {"degree": d, "profiles": [[…], …]}}`.
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(idx, f)| {
                (format!("{},{},{}", idx[0], idx[1], idx[2]), json!({"degree": f.degree(), "profiles": f.profiles()}))
            })
            .collect();
        Value::Object(map)
    }
}

/// Solves every `Ψ_ijk`, `(i,j,k) ∈ 𝒥`, in increasing total order.
pub fn expand_reduction<P: ApplicationSpec + ?Sized>(solver: &BorderedSolver, problem: &P) -> Result<PsiTable> {
    let grid = solver.grid();
    let index_set = problem.index_set();
    let mut entries: BTreeMap<Index, XPolyField> = BTreeMap::new();
    let phi0 = solver.phi0().to_vec();
    let max_order = index_set.iter().map(|i| i.iter().map(|v| *v as u32).sum::<u32>()).max().unwrap_or(0);
    for order in 1..=max_order {
        let targets: Vec<Index> =
            index_set.iter().copied().filter(|i| i.iter().map(|v| *v as u32).sum::<u32>() == order).collect();
        if targets.is_empty() {
            continue;
        }
        let mut u = Series::new(grid, problem.weights(), problem.max_weight());
        u.insert([1, 0, 0], XPolyField::monomial(grid, 0, phi0.clone())?)?;
        u.insert([0, 1, 0], XPolyField::monomial(grid, 1, phi0.clone())?)?;
        for (idx, f) in &entries {
            u.insert(*idx, f.clone())?;
        }
        let f = problem.nonlinearity(&u)?;
        for idx in targets {
            let rhs = f.get(idx).cloned().unwrap_or_else(|| XPolyField::zero(grid));
            entries.insert(idx, solver.solve_bordered(&rhs)?);
        }
    }
    Ok(PsiTable { grid, y_star: solver.eval_point(), entries })
}

/// Expands on grids `n` and `2n` and returns the extrapolated table.
pub fn expand_reduction_extrapolated<P: ApplicationSpec + ?Sized>(
    op: &BaseOperator,
    problem: &P,
    d_max: usize,
) -> Result<PsiTable> {
    let coarse = expand_reduction(&BorderedSolver::with_d_max(op, d_max)?, problem)?;
    if !op.refinable() {
        return Ok(coarse);
    }
    let fine_op = op.with_grid(2 * op.grid().n)?;
    let fine = expand_reduction(&BorderedSolver::with_d_max(&fine_op, d_max)?, problem)?;
    PsiTable::richardson(&coarse, &fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{elasticity_family, fkpp_family};

    fn elasticity_solver(n: usize) -> BorderedSolver {
        BorderedSolver::new(&elasticity_family(n)(-1.0).unwrap()).unwrap()
    }

    #[test]
    fn apply_l_examples() {
        let s = elasticity_solver(256);
        let g = s.grid();
        let f = XPolyField::from_fn(g, 2, f64::cos);
        let lf = s.apply_l(&f).unwrap();
        assert_eq!(lf.degree(), 2);
        for i in 1..g.n {
            assert!((lf.profile(0)[i] - 2.0 * g.node(i).cos()).abs() < 1e-10);
            assert!(lf.profile(2)[i].abs() < 1e-10);
        }
        let k = s.apply_l(&XPolyField::from_fn(g, 0, f64::cos)).unwrap();
        assert!(k.max_abs() < 1e-10);
        let odd = s.apply_l(&XPolyField::from_fn(g, 1, |y| (2.0 * y).sin())).unwrap();
        for i in 1..g.n {
            assert!((odd.profile(1)[i] + 3.0 * (2.0 * g.node(i)).sin()).abs() < 2.0 * g.h() * g.h());
        }
    }

    #[test]
    fn bordered_solve_of_kernel_forcing() {
        let s = elasticity_solver(256);
        let g = s.grid();
        let psi = s.solve_bordered(&XPolyField::from_fn(g, 0, |y| -y.cos())).unwrap();
        assert_eq!(psi.degree(), 2);
        for i in 0..=g.n {
            assert!((psi.profile(2)[i] + 0.5 * g.node(i).cos()).abs() < 1e-12);
            assert!(psi.profile(0)[i].abs() < 1e-12);
        }
        assert!((reduced_coefficient(&psi, 0.0) + 1.0).abs() < 1e-12);
        assert!(s.solve_bordered(&XPolyField::zero(g)).unwrap().is_zero());
    }

    #[test]
    fn degree_overflow_is_reported() {
        let s = elasticity_solver(64);
        let rhs = XPolyField::from_fn(s.grid(), 5, f64::cos);
        assert!(matches!(s.solve_bordered(&rhs), Err(Error::DegreeOverflow { needed: 7, d_max: 6 })));
    }

    #[test]
    fn transverse_solve_of_higher_mode() {
        let s = elasticity_solver(512);
        let g = s.grid();
        let h: Vec<f64> = g.nodes().map(|y| (3.0 * y).cos()).collect();
        let sol = s.solve_transverse(&h, 0.0).unwrap();
        assert!(sol.solvability.abs() < 1e-12);
        for (i, y) in g.nodes().enumerate() {
            assert!((sol.g[i] + (3.0 * y).cos() / 8.0).abs() < 1e-5);
        }
    }

    #[test]
    fn fkpp_solvability_constant() {
        let rho0 = 0.860_333_589_019_379_8;
        let s = BorderedSolver::new(&fkpp_family(1.0, 512)(rho0).unwrap()).unwrap();
        let h: Vec<f64> = s.grid().nodes().map(|y| (rho0 * y).cos().powi(2)).collect();
        let c2 = s.solve_transverse(&h, 0.0).unwrap().solvability;
        let exact = 4.0 * rho0.sin() * (3.0 - rho0.sin().powi(2)) / (3.0 * ((2.0 * rho0).sin() + 2.0 * rho0));
        assert!((c2 - exact).abs() < 1e-5);
    }
}
