use std::sync::Arc;

use crate::{BoxDomain, Error, Grid, Result};

const MASS_TOL: f64 = 1e-12;

/// Finitely supported probability measure `Σ_i w_i δ_{x_i}` on `R^d`.
///
/// Coordinates are stored flat (`len() * dim()` values). A measure built
/// from a [`Grid`] keeps a reference to it so entropies can use the cell
/// volume as the Lebesgue density normalizer.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    grid: Option<Arc<Grid>>,
}

impl DiscreteMeasure {
    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        validate_shape(dim, &coords, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(DiscreteMeasure { dim, coords, weights, grid: None })
    }

    /// Divides the weights by their (positive) sum.
    pub fn from_unnormalized(dim: usize, coords: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        validate_shape(dim, &coords, &weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid(format!("total mass {total} cannot be normalized")));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(DiscreteMeasure { dim, coords, weights, grid: None })
    }

    pub fn dirac(x: &[f64]) -> Self {
        DiscreteMeasure { dim: x.len(), coords: x.to_vec(), weights: vec![1.0], grid: None }
    }

    /// Uniform weights on the given (flattened) points.
    pub fn uniform(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::invalid("uniform measure needs at least one d-vector"));
        }
        let n = coords.len() / dim;
        Self::from_unnormalized(dim, coords, vec![1.0; n])
    }

    /// 1D convenience constructor.
    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(1, points.to_vec(), weights.to_vec())
    }

    pub(crate) fn with_grid(mut self, grid: Arc<Grid>) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_deref()
    }

    pub fn is_inside(&self, domain: &BoxDomain) -> bool {
        domain.dim() == self.dim && self.points().all(|x| domain.contains(x))
    }

    pub fn check_inside(&self, domain: &BoxDomain) -> Result<()> {
        if domain.dim() != self.dim {
            return Err(Error::UnsupportedDimension { expected: domain.dim(), got: self.dim });
        }
        match self.points().position(|x| !domain.contains(x)) {
            Some(i) => Err(Error::mismatch(format!("atom {i} at {:?} lies outside the box", self.point(i)))),
            None => Ok(()),
        }
    }

    /// Same atoms, new weights (normalized here). Keeps the grid tag.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::mismatch(format!("{} weights for {} atoms", weights.len(), self.len())));
        }
        let mut m = Self::from_unnormalized(self.dim, self.coords.clone(), weights)?;
        m.grid = self.grid.clone();
        Ok(m)
    }

    /// `(1 - t) self + t other` for measures on identical atoms.
    pub fn mix(&self, other: &DiscreteMeasure, t: f64) -> Result<Self> {
        self.check_same_support(other)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        self.reweighted(w)
    }

    pub fn check_same_support(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::mismatch(format!(
                "supports differ in size ({}x{} vs {}x{})",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        if self.coords.iter().zip(&other.coords).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs())) {
            return Err(Error::mismatch("atom locations differ"));
        }
        Ok(())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (x, w) in self.points().zip(&self.weights) {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += w * xi;
            }
        }
        m
    }

    /// Per-coordinate variance averaged over axes: `E‖X - EX‖² / d`; equals
    /// `b` for an isotropic covariance `b I_d`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let total: f64 = self
            .points()
            .zip(&self.weights)
            .map(|(x, w)| w * x.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum();
        total / self.dim as f64
    }

    /// Drops atoms with zero weight.
    pub fn support(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        let coords = keep.iter().flat_map(|&i| self.point(i).to_vec()).collect();
        let weights = keep.iter().map(|&i| self.weights[i]).collect();
        DiscreteMeasure { dim: self.dim, coords, weights, grid: None }
    }

    /// Same weights, atoms moved to `coords`.
    pub fn with_coords(&self, coords: Vec<f64>) -> Result<Self> {
        validate_shape(self.dim, &coords, &self.weights)?;
        Ok(DiscreteMeasure { dim: self.dim, coords, weights: self.weights.clone(), grid: None })
    }
}

/// `Σ_i |w_i - w'_i|`, the total-variation norm of the difference of two
/// measures on identical atoms.
pub fn l1_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    a.check_same_support(b)?;
    Ok(a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).abs()).sum())
}

fn validate_shape(dim: usize, coords: &[f64], weights: &[f64]) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if weights.is_empty() {
        return Err(Error::invalid("a measure needs at least one atom"));
    }
    if coords.len() != dim * weights.len() {
        return Err(Error::invalid(format!(
            "{} coordinates do not match {} atoms in dimension {dim}",
            coords.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::invalid(format!("weight {w} is not a nonnegative finite number")));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("non-finite coordinate"));
    }
    Ok(())
}
