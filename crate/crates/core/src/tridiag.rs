//! Tridiagonal kernels: pivoted LU and Sturm-sequence bisection.

use crate::error::{Error, Result};

/// LU factorization of a general tridiagonal matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct TriLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    fact: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    /// Factors the matrix with sub-diagonal `dl`, diagonal `d`, super-diagonal `du`.
    pub fn new(dl: &[f64], d: &[f64], du: &[f64]) -> Result<Self> {
        let n = d.len();
        if n == 0 || dl.len() + 1 != n || du.len() + 1 != n {
            return Err(Error::InvalidOperator("tridiagonal band lengths".into()));
        }
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut fact = vec![0.0; n - 1];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::InvalidOperator("singular tridiagonal matrix".into()));
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                fact[i] = f;
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - f * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                du[i] = temp;
                fact[i] = f;
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::InvalidOperator("singular tridiagonal matrix".into()));
        }
        Ok(Self { d, du, du2, fact, swapped })
    }

    /// Solves the factored system for one right-hand side.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.fact[i] * b[i + 1];
            } else {
                b[i + 1] -= self.fact[i] * b[i];
            }
        }
        let mut x = vec![0.0; n];
        x[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            x[n - 2] = (b[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (b[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON * (e[i - 1].abs() + 1.0) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th largest eigenvalue (k = 0 is the largest) by Sturm bisection.
pub fn kth_largest(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    // The k-th largest value is the (n-1-k)-th smallest: count(< x) <= n-1-k exactly below it.
    let target = n - 1 - k;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(d, e, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(dl: &[f64], d: &[f64], du: &[f64], x: &[f64]) -> Vec<f64> {
        let n = d.len();
        (0..n)
            .map(|i| {
                let mut s = d[i] * x[i];
                if i > 0 {
                    s += dl[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += du[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn pivoted_solve_handles_small_diagonal() {
        let dl = vec![3.0, 1.0, -2.0, 5.0];
        let d = vec![1e-14, 2.0, 1e-12, 4.0, 1.0];
        let du = vec![1.0, -1.0, 2.0, 0.5];
        let x: Vec<f64> = (0..5).map(|i| (i as f64 + 1.0).sin()).collect();
        let b = matvec(&dl, &d, &du, &x);
        let sol = TriLu::new(&dl, &d, &du).unwrap().solve(&b);
        for (a, b) in sol.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sturm_bisection_on_laplacian() {
        let n = 50;
        let d = vec![-2.0; n];
        let e = vec![1.0; n - 1];
        let exact = |k: usize| -4.0 * ((k + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin().powi(2);
        for k in 0..3 {
            assert!((kth_largest(&d, &e, k) - exact(k)).abs() < 1e-13);
        }
    }
}
