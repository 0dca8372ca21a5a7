use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{DiscreteMeasure, Error, Result};

/// Axis-aligned box `Π [lo_i, hi_i]` with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid(format!(
                "box bounds must be nonempty and of equal length (lo: {}, hi: {})",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(format!("box axis {i} is degenerate: [{l}, {h}]")));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Euclidean projection onto the box (componentwise clamp).
    pub fn project(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        Self::new(
            self.lo.iter().zip(shift).map(|(l, s)| l + s).collect(),
            self.hi.iter().zip(shift).map(|(h, s)| h + s).collect(),
        )
    }
}

/// Regular midpoint grid over a box; cells are enumerated row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: BoxDomain,
    cells: Vec<usize>,
    cell_volume: f64,
}

impl Grid {
    pub fn new(domain: BoxDomain, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != domain.dim() {
            return Err(Error::invalid(format!(
                "grid has {} axes but the box has dimension {}",
                cells.len(),
                domain.dim()
            )));
        }
        if cells.contains(&0) {
            return Err(Error::invalid("grid needs at least one cell per axis"));
        }
        let cell_volume = domain
            .lo()
            .iter()
            .zip(domain.hi())
            .zip(&cells)
            .map(|((l, h), &n)| (h - l) / n as f64)
            .product();
        Ok(Grid { domain, cells, cell_volume })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.domain.hi()[axis] - self.domain.lo()[axis]) / self.cells[axis] as f64
    }

    pub fn center_into(&self, index: usize, out: &mut [f64]) {
        let mut rest = index;
        for axis in (0..self.dim()).rev() {
            let n = self.cells[axis];
            let i = rest % n;
            rest /= n;
            out[axis] = self.domain.lo()[axis] + (i as f64 + 0.5) * self.spacing(axis);
        }
    }

    pub fn center(&self, index: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(index, &mut x);
        x
    }

    /// All cell centers, flattened (`len() * dim()` values).
    pub fn centers(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.len() * d];
        for (i, chunk) in out.chunks_mut(d).enumerate() {
            self.center_into(i, chunk);
        }
        out
    }

    /// Grid measure with the given (normalized here) cell weights.
    pub fn measure(&self, weights: Vec<f64>) -> Result<DiscreteMeasure> {
        if weights.len() != self.len() {
            return Err(Error::mismatch(format!(
                "{} weights for a grid of {} cells",
                weights.len(),
                self.len()
            )));
        }
        DiscreteMeasure::from_unnormalized(self.dim(), self.centers(), weights)
            .map(|m| m.with_grid(Arc::new(self.clone())))
    }

    /// Normalized Lebesgue measure on the box.
    pub fn uniform(&self) -> DiscreteMeasure {
        let n = self.len();
        self.measure(vec![1.0 / n as f64; n]).expect("uniform weights are valid")
    }

    /// Grid measure with weights proportional to `density(center)`.
    pub fn discretize<F: Fn(&[f64]) -> f64>(&self, density: F) -> Result<DiscreteMeasure> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        let w = (0..self.len())
            .map(|i| {
                self.center_into(i, &mut x);
                density(&x)
            })
            .collect();
        self.measure(w)
    }

    /// Grid measure with weights proportional to `exp(log_density(center))`,
    /// normalized in the log domain.
    pub fn discretize_log<F: Fn(&[f64]) -> f64>(&self, log_density: F) -> Result<DiscreteMeasure> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        let logs: Vec<f64> = (0..self.len())
            .map(|i| {
                self.center_into(i, &mut x);
                log_density(&x)
            })
            .collect();
        let lse = crate::lse::log_sum_exp(&logs);
        if !lse.is_finite() {
            return Err(Error::numerical("log density normalizer is not finite"));
        }
        self.measure(logs.iter().map(|l| (l - lse).exp()).collect())
    }

    /// True when `m` has exactly one atom per cell, located at its center.
    pub fn aligned_with(&self, m: &DiscreteMeasure) -> bool {
        if m.dim() != self.dim() || m.len() != self.len() {
            return false;
        }
        if let Some(g) = m.grid() {
            if g == self {
                return true;
            }
        }
        let mut c = vec![0.0; self.dim()];
        let tol = 1e-9 * self.domain.diameter();
        (0..self.len()).all(|i| {
            self.center_into(i, &mut c);
            m.point(i).iter().zip(&c).all(|(a, b)| (a - b).abs() <= tol)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(BoxDomain::new(vec![], vec![]).is_err());
    }

    #[test]
    fn cell_volume_times_count_is_volume() {
        let b = BoxDomain::new(vec![-1.0, 0.5], vec![2.0, 1.75]).unwrap();
        let g = Grid::new(b.clone(), vec![7, 13]).unwrap();
        assert!((g.cell_volume() * g.len() as f64 - b.volume()).abs() < 1e-12);
    }

    #[test]
    fn centers_are_row_major() {
        let g = Grid::new(BoxDomain::cube(0.0, 1.0, 2).unwrap(), vec![2, 4]).unwrap();
        assert_eq!(g.center(0), vec![0.25, 0.125]);
        assert_eq!(g.center(1), vec![0.25, 0.375]);
        assert_eq!(g.center(4), vec![0.75, 0.125]);
    }

    #[test]
    fn projection_clamps() {
        let b = BoxDomain::cube(-1.0, 1.0, 2).unwrap();
        let mut x = [3.0, -0.5];
        b.project(&mut x);
        assert_eq!(x, [1.0, -0.5]);
    }
}
