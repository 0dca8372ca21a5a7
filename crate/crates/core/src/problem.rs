use crate::{BoxDomain, Cost, DiscreteMeasure, Error, Result};

/// Marginals `ν_k`, weights `w_k`, inner strength `λ`, outer strength `τ`,
/// ground cost and the box `X` the barycenter lives on.
#[derive(Debug, Clone)]
pub struct BarycenterProblem {
    pub marginals: Vec<DiscreteMeasure>,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub tau: f64,
    pub cost: Cost,
    pub domain: BoxDomain,
}

impl BarycenterProblem {
    /// `λ > 0`, `τ ≥ 0`; grid solvers additionally require `τ > 0`.
    pub fn new(
        marginals: Vec<DiscreteMeasure>,
        weights: Vec<f64>,
        lambda: f64,
        tau: f64,
        cost: Cost,
        domain: BoxDomain,
    ) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::invalid("a barycenter problem needs at least one marginal"));
        }
        if weights.len() != marginals.len() {
            return Err(Error::invalid(format!("{} weights for {} marginals", weights.len(), marginals.len())));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("barycenter weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("barycenter weights sum to {total}, expected 1")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("inner strength λ = {lambda} must be positive")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::invalid(format!("outer strength τ = {tau} must be nonnegative")));
        }
        for (k, m) in marginals.iter().enumerate() {
            m.check_inside(&domain).map_err(|e| Error::invalid(format!("marginal {k}: {e}")))?;
        }
        Ok(BarycenterProblem { marginals, weights, lambda, tau, cost, domain })
    }

    /// Equal weights `1/K`.
    pub fn uniform(marginals: Vec<DiscreteMeasure>, lambda: f64, tau: f64, cost: Cost, domain: BoxDomain) -> Result<Self> {
        let k = marginals.len().max(1);
        Self::new(marginals, vec![1.0 / k as f64; k], lambda, tau, cost, domain)
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.marginals.clone(), self.weights.clone(), self.lambda, tau, self.cost.clone(), self.domain.clone())
    }

    pub fn with_marginals(&self, marginals: Vec<DiscreteMeasure>) -> Result<Self> {
        Self::new(marginals, self.weights.clone(), self.lambda, self.tau, self.cost.clone(), self.domain.clone())
    }

    pub(crate) fn require_positive_tau(&self) -> Result<()> {
        if self.tau > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("grid solvers require τ > 0"))
        }
    }
}
