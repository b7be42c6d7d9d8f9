//! Truncated power series in `(A, B, ε)` with [`XPolyField`] coefficients.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::spectrum::Grid;
use crate::xpoly::XPolyField;

/// Multi-index `(i, j, k)` for `Aⁱ Bʲ εᵏ`.
pub type Index = [u8; 3];

/// Series truncated by a weighted degree `wᵢ i + w_j j + w_k k ≤ max`.
#[derive(Debug, Clone)]
pub struct Series {
    grid: Grid,
    weights: [u32; 3],
    max_weight: u32,
    terms: BTreeMap<Index, XPolyField>,
}

impl Series {
    pub fn new(grid: Grid, weights: [u32; 3], max_weight: u32) -> Self {
        Self { grid, weights, max_weight, terms: BTreeMap::new() }
    }

    pub fn weight(&self, idx: Index) -> u32 {
        idx.iter().zip(self.weights).map(|(i, w)| *i as u32 * w).sum()
    }

    fn empty_like(&self) -> Self {
        Self::new(self.grid, self.weights, self.max_weight)
    }

    /// Adds `field · Aⁱ Bʲ εᵏ`, ignoring terms beyond the truncation.
    pub fn insert(&mut self, idx: Index, field: XPolyField) -> Result<()> {
        if self.weight(idx) > self.max_weight || field.is_zero() {
            return Ok(());
        }
        let merged = match self.terms.remove(&idx) {
            Some(old) => old.add(&field)?,
            None => field,
        };
        if !merged.is_zero() {
            self.terms.insert(idx, merged);
        }
        Ok(())
    }

    pub fn get(&self, idx: Index) -> Option<&XPolyField> {
        self.terms.get(&idx)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, &XPolyField)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (idx, f) in &other.terms {
            out.insert(*idx, f.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.empty_like();
        out.terms = self.terms.iter().map(|(k, v)| (*k, v.scale(s))).collect();
        out
    }

    /// Multiplies by `εᵏ`.
    pub fn shift_eps(&self, k: u8) -> Result<Self> {
        let mut out = self.empty_like();
        for (idx, f) in &self.terms {
            out.insert([idx[0], idx[1], idx[2] + k], f.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.empty_like();
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let idx = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if out.weight(idx) <= out.max_weight {
                    out.insert(idx, fa.mul(fb)?)?;
                }
            }
        }
        Ok(out)
    }

    pub fn dx(&self) -> Result<Self> {
        self.map(XPolyField::dx)
    }

    pub fn dy(&self) -> Result<Self> {
        self.map(XPolyField::dy)
    }

    fn map<F: Fn(&XPolyField) -> XPolyField>(&self, f: F) -> Result<Self> {
        let mut out = self.empty_like();
        for (idx, v) in &self.terms {
            out.insert(*idx, f(v))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_product() {
        let g = Grid { y_lo: 0.0, y_hi: 1.0, n: 32 };
        let mut a = Series::new(g, [1, 2, 1], 3);
        a.insert([1, 0, 0], XPolyField::from_fn(g, 0, |_| 1.0)).unwrap();
        a.insert([0, 1, 0], XPolyField::from_fn(g, 1, |_| 1.0)).unwrap();
        let sq = a.mul(&a).unwrap();
        assert!(sq.get([2, 0, 0]).is_some());
        assert!(sq.get([1, 1, 0]).is_some());
        assert!(sq.get([0, 2, 0]).is_none());
        let cube = sq.mul(&a).unwrap();
        assert!((cube.get([3, 0, 0]).unwrap().eval(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!(cube.get([2, 1, 0]).is_none());
    }
}
