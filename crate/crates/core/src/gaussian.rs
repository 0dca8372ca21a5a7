//! Closed forms for barycenters of isotropic Gaussians `N(x_k, a I_d)` with a
//! common variance `a`, used as ground truth for the numerical solvers.

use crate::{Error, Result};

/// `N(mean, variance · I_d)`; `variance = 0` is a point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianIso {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianIso {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::invalid(format!("variance {variance} must be finite and nonnegative")));
        }
        if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("mean must be a finite, nonempty vector"));
        }
        Ok(GaussianIso { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log-density up to the normalizing constant; `-∞` away from the mean
    /// for a point mass.
    pub fn log_density_unnormalized(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        if self.variance == 0.0 {
            return if r2 == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        }
        -0.5 * r2 / self.variance
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must be finite and nonnegative")))
    }
}

/// Variance `b` of the `(λ, τ)`-barycenter of Gaussians with variance `a`:
/// `b = ((a + √((a-λ)² + 4aτ))² - λ²) / (4a)`, and `b = τ` for point masses.
pub fn barycenter_variance(a: f64, lambda: f64, tau: f64) -> Result<f64> {
    check_nonneg("a", a)?;
    check_nonneg("lambda", lambda)?;
    check_nonneg("tau", tau)?;
    if a == 0.0 {
        return Ok(tau);
    }
    let s = a + ((a - lambda).powi(2) + 4.0 * a * tau).sqrt();
    Ok(((s * s - lambda * lambda) / (4.0 * a)).max(0.0))
}

/// The outer strength `τ*(λ) = λ/2 + a(1 - √(1 + λ²/(4a²)))` for which the
/// barycenter has variance exactly `a`.
pub fn tau_star(a: f64, lambda: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a = {a} must be positive")));
    }
    check_nonneg("lambda", lambda)?;
    let r = lambda / (2.0 * a);
    // 1 - √(1 + r²) = -r² / (1 + √(1 + r²)) avoids cancellation for small λ.
    Ok(lambda / 2.0 - a * r * r / (1.0 + (1.0 + r * r).sqrt()))
}

/// `(ξ, ũ, ṽ)` with `ξ = √(4ab + λ²)`, `ũ = 1 - 2b/(ξ+λ)`, `ṽ = 1 - 2a/(ξ+λ)`:
/// the potentials `φ = ½ũ|x|²`, `ψ = ½ṽ|y|²` solve the Schrödinger system
/// between `N(0, a)` and `N(0, b)`.
pub fn gaussian_eot_quantities(a: f64, b: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("a", a), ("b", b), ("lambda", lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} = {v} must be positive")));
        }
    }
    let xi = (4.0 * a * b + lambda * lambda).sqrt();
    Ok((xi, 1.0 - 2.0 * b / (xi + lambda), 1.0 - 2.0 * a / (xi + lambda)))
}

/// Residual `ṽ - τ/b` of the barycenter optimality condition.
pub fn optimality_residual(a: f64, lambda: f64, tau: f64) -> Result<f64> {
    let b = barycenter_variance(a, lambda, tau)?;
    let (_, _, v) = gaussian_eot_quantities(a, b, lambda)?;
    Ok(v - tau / b)
}

/// Named regimes with their reference variance formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `a`
    Unregularized,
    /// `max{a - λ, 0}`
    InnerOnly,
    /// `a + 2τ - τ²/a`, to second order in τ.
    OuterOnly,
    /// `a + λ` at `τ = λ`.
    Schrodinger,
    /// `a + λ²/(4a)` at `τ = λ/2`, to second order in λ.
    DebiasedHalf,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unregularized" => Ok(Regime::Unregularized),
            "inner_only" => Ok(Regime::InnerOnly),
            "outer_only" => Ok(Regime::OuterOnly),
            "schrodinger" => Ok(Regime::Schrodinger),
            "debiased_half" => Ok(Regime::DebiasedHalf),
            other => Err(Error::invalid(format!("unknown regime tag {other:?}"))),
        }
    }
}

pub fn table2_row(regime: Regime, a: f64, lambda: f64, tau: f64) -> Result<f64> {
    check_nonneg("lambda", lambda)?;
    check_nonneg("tau", tau)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a = {a} must be positive")));
    }
    Ok(match regime {
        Regime::Unregularized => a,
        Regime::InnerOnly => (a - lambda).max(0.0),
        Regime::OuterOnly => a + 2.0 * tau - tau * tau / a,
        Regime::Schrodinger => a + lambda,
        Regime::DebiasedHalf => a + lambda * lambda / (4.0 * a),
    })
}

/// `W₂²(N(0, bI), N(0, aI)) / d = (√b - √a)²`.
pub fn w2_distance(a: f64, lambda: f64, tau: f64) -> Result<f64> {
    let b = barycenter_variance(a, lambda, tau)?;
    Ok((b.sqrt() - a.sqrt()).powi(2))
}

/// The barycenter of `N(x_k, a)` with weights `w_k`: mean `Σ w_k x_k`,
/// variance [`barycenter_variance`].
pub fn gaussian_barycenter(marginals: &[GaussianIso], weights: &[f64], lambda: f64, tau: f64) -> Result<GaussianIso> {
    let first = marginals.first().ok_or_else(|| Error::invalid("no marginals"))?;
    if weights.len() != marginals.len() {
        return Err(Error::invalid("weights and marginals differ in length"));
    }
    let a = first.variance;
    let d = first.dim();
    let mut mean = vec![0.0; d];
    for (g, w) in marginals.iter().zip(weights) {
        if g.dim() != d {
            return Err(Error::UnsupportedDimension { expected: d, got: g.dim() });
        }
        if (g.variance - a).abs() > 1e-12 * a.max(1.0) {
            return Err(Error::invalid("marginal variances must be equal"));
        }
        for (m, x) in mean.iter_mut().zip(&g.mean) {
            *m += w * x;
        }
    }
    GaussianIso::new(mean, barycenter_variance(a, lambda, tau)?)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
