//! Entropic optimal transport with reference measure `μ ⊗ ν`.
//!
//! `T_λ(μ, ν) = min_{γ ∈ Π(μ, ν)} ∫ c dγ + λ H(γ | μ ⊗ ν)` is solved by
//! alternating the two soft c-transforms of the Schrödinger system in the
//! log domain:
//!
//! ```text
//! φ(x) = -λ log Σ_j ν_j exp((ψ_j - c(x, y_j)) / λ)
//! ψ(y) = -λ log Σ_i μ_i exp((φ_i - c(x_i, y)) / λ)
//! ```
//!
//! Potentials are only defined up to `(φ + k, ψ - k)`; returned pairs are
//! normalized so that `Σ_i μ_i φ_i = 0`.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::lse::{log_sum_exp, log_sum_exp_softmax};
use crate::measures::entropy;
use crate::{BarycenterProblem, Cost, DiscreteMeasure, Error, Grid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    /// Stop once the sup-norm change of `ψ` over one sweep and the `L¹`
    /// violation of the plan marginals are both below `tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        SinkhornOptions { tol: 1e-9, max_iter: 100_000 }
    }
}

impl SinkhornOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        SinkhornOptions { tol, max_iter }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `Σ_i μ_i φ(x_i) = 0`.
    MeanZeroPhi,
}

/// Schrödinger potentials on the atoms of `μ` (`phi`) and `ν` (`psi`).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub lambda: f64,
    pub normalization: Normalization,
}

#[derive(Debug, Clone)]
pub struct EotSolution {
    pub potentials: PotentialPair,
    /// `T_λ(μ, ν) = Σ μ_i φ_i + Σ ν_j ψ_j`.
    pub cost: f64,
    /// Larger of the row and column `L¹` errors of the implied plan.
    pub marginal_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl EotSolution {
    /// The plan `γ_ij = μ_i ν_j exp((φ_i + ψ_j - c_ij) / λ)`.
    pub fn plan(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &Cost) -> Array2<f64> {
        let lambda = self.potentials.lambda;
        let (phi, psi) = (&self.potentials.phi, &self.potentials.psi);
        Array2::from_shape_fn((mu.len(), nu.len()), |(i, j)| {
            let (a, b) = (mu.weights()[i], nu.weights()[j]);
            if a == 0.0 || b == 0.0 {
                return 0.0;
            }
            a * b * ((phi[i] + psi[j] - cost.eval(mu.point(i), nu.point(j))) / lambda).exp()
        })
    }
}

/// Dense log-domain Sinkhorn on strictly positive marginals with an
/// arbitrary product reference `a ⊗ b` (`a = μ, b = ν` is the standard case).
struct DenseSinkhorn<'a> {
    cost: &'a Array2<f64>,
    cost_t: Array2<f64>,
    mu: &'a [f64],
    nu: &'a [f64],
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    lambda: f64,
}

/// Sinkhorn sweeps between Newton polishing passes.
const NEWTON_EVERY: usize = 200;
/// Largest support on which the semi-dual Hessian is factorized.
const NEWTON_MAX_DIM: usize = 256;

/// Semi-dual in the column potential `g`, with the row potential eliminated
/// by its soft c-transform:
/// `J(g) = Σ_i r_i f_i(g) + Σ_j s_j g_j`,
/// `f_i(g) = -λ log Σ_j b_j exp((g_j - C_ij)/λ) + λ log(r_i / a_i)`.
struct SemiDual<'a> {
    cost: &'a Array2<f64>,
    rows: &'a [f64],
    log_rows: &'a [f64],
    log_ref_rows: &'a [f64],
    cols: &'a [f64],
    log_ref_cols: &'a [f64],
    lambda: f64,
}

impl SemiDual<'_> {
    fn value(&self, g: &[f64], scratch: &mut [f64]) -> f64 {
        let inv = 1.0 / self.lambda;
        let mut total: f64 = self.cols.iter().zip(g).map(|(s, v)| s * v).sum();
        for (i, row) in self.cost.outer_iter().enumerate() {
            for ((o, (&lb, &gj)), &c) in scratch.iter_mut().zip(self.log_ref_cols.iter().zip(g)).zip(row) {
                *o = lb + (gj - c) * inv;
            }
            let f = -self.lambda * log_sum_exp(scratch) + self.lambda * (self.log_rows[i] - self.log_ref_rows[i]);
            total += self.rows[i] * f;
        }
        total
    }

    /// Damped Newton ascent on `J` with steps capped at `10λ` in sup norm.
    fn newton(&self, g: &mut [f64], tol: f64) {
        let m = g.len();
        let inv = 1.0 / self.lambda;
        let mut p = vec![0.0; m];
        let mut trial = vec![0.0; m];
        for _ in 0..100 {
            let mut grad: Vec<f64> = self.cols.to_vec();
            let mut hess = vec![0.0; m * m];
            for (i, row) in self.cost.outer_iter().enumerate() {
                for ((o, (&lb, &gj)), &c) in p.iter_mut().zip(self.log_ref_cols.iter().zip(g.iter())).zip(row) {
                    *o = lb + (gj - c) * inv;
                }
                log_sum_exp_softmax(&mut p);
                let r = self.rows[i];
                for (a, &pa) in p.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    grad[a] -= r * pa;
                    hess[a * m + a] += r * pa * inv;
                    for (b, &pb) in p.iter().enumerate() {
                        hess[a * m + b] -= r * pa * pb * inv;
                    }
                }
            }
            let gnorm = grad.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if !(gnorm > tol) {
                return;
            }
            let diag_max = (0..m).map(|a| hess[a * m + a]).fold(0.0f64, f64::max);
            let ridge = 1e-10 * diag_max + f64::MIN_POSITIVE;
            for a in 0..m {
                hess[a * m + a] += ridge;
            }
            let mut dir = grad.clone();
            if !cholesky_solve(&mut hess, m, &mut dir) {
                return;
            }
            let dmax = dir.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let cap = 10.0 * self.lambda;
            if dmax > cap {
                dir.iter_mut().for_each(|d| *d *= cap / dmax);
            }
            let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            let mut scratch = vec![0.0; m];
            let base = self.value(g, &mut scratch);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..50 {
                for ((x, &v), &d) in trial.iter_mut().zip(g.iter()).zip(&dir) {
                    *x = v + t * d;
                }
                if self.value(&trial, &mut scratch) >= base + 1e-4 * t * slope {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return;
            }
            g.copy_from_slice(&trial);
        }
    }
}

/// Solves `A x = b` in place for symmetric positive definite `A` (row-major
/// `n × n`); returns false if the factorization breaks down.
fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

struct DenseResult {
    f: Vec<f64>,
    g: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl<'a> DenseSinkhorn<'a> {
    fn new(cost: &'a Array2<f64>, mu: &'a [f64], nu: &'a [f64], log_a: Vec<f64>, log_b: Vec<f64>, lambda: f64) -> Self {
        DenseSinkhorn { cost, cost_t: cost.t().as_standard_layout().into_owned(), mu, nu, log_a, log_b, lambda }
    }

    fn update(
        costs: &Array2<f64>,
        other: &[f64],
        log_ref_other: &[f64],
        log_target: &[f64],
        log_ref_self: &[f64],
        lambda: f64,
        out: &mut [f64],
        scratch: &mut [f64],
    ) {
        let inv = 1.0 / lambda;
        for (i, row) in costs.outer_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            for ((s, (&o, &lr)), &c) in scratch.iter_mut().zip(other.iter().zip(log_ref_other)).zip(row) {
                *s = lr + (o - c) * inv;
            }
            out[i] = -lambda * log_sum_exp(scratch) + lambda * (log_target[i] - log_ref_self[i]);
        }
    }

    fn run(&self, warm_g: Option<Vec<f64>>, opts: &SinkhornOptions) -> Result<DenseResult> {
        let (n, m) = (self.mu.len(), self.nu.len());
        let lambda = self.lambda;
        let log_mu: Vec<f64> = self.mu.iter().map(|w| w.ln()).collect();
        let log_nu: Vec<f64> = self.nu.iter().map(|w| w.ln()).collect();
        let mut f = vec![0.0; n];
        let mut g = warm_g.unwrap_or_else(|| vec![0.0; m]);
        let mut f_new = vec![0.0; n];
        let mut g_new = vec![0.0; m];
        let mut scratch_f = vec![0.0; m];
        let mut scratch_g = vec![0.0; n];
        let mut first = true;
        for it in 1..=opts.max_iter {
            Self::update(self.cost, &g, &self.log_b, &log_mu, &self.log_a, lambda, &mut f_new, &mut scratch_f);
            let row_err: f64 = if first {
                f64::INFINITY
            } else {
                self.mu.iter().zip(f.iter().zip(&f_new)).map(|(w, (old, new))| w * ((old - new) / lambda).exp_m1().abs()).sum()
            };
            first = false;
            std::mem::swap(&mut f, &mut f_new);
            Self::update(&self.cost_t, &f, &self.log_a, &log_nu, &self.log_b, lambda, &mut g_new, &mut scratch_g);
            let change = g.iter().zip(&g_new).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut g, &mut g_new);
            if !change.is_finite() || f.iter().any(|v| !v.is_finite()) {
                return Err(Error::numerical(format!("Sinkhorn potentials became non-finite at iteration {it}")));
            }
            if change <= opts.tol && row_err <= opts.tol {
                return Ok(DenseResult { f, g, iterations: it, converged: true });
            }
            if it % NEWTON_EVERY == 0 && m.min(n) <= NEWTON_MAX_DIM {
                let newton_tol = 1e-3 * opts.tol;
                if m <= n {
                    let side = SemiDual { cost: self.cost, rows: self.mu, log_rows: &log_mu, log_ref_rows: &self.log_a, cols: self.nu, log_ref_cols: &self.log_b, lambda };
                    side.newton(&mut g, newton_tol);
                } else {
                    let side = SemiDual { cost: &self.cost_t, rows: self.nu, log_rows: &log_nu, log_ref_rows: &self.log_b, cols: self.mu, log_ref_cols: &self.log_a, lambda };
                    side.newton(&mut f, newton_tol);
                    Self::update(&self.cost_t, &f, &self.log_a, &log_nu, &self.log_b, lambda, &mut g, &mut scratch_g);
                }
                first = true;
            }
        }
        Ok(DenseResult { f, g, iterations: opts.max_iter, converged: false })
    }

    fn marginal_error(&self, f: &[f64], g: &[f64]) -> f64 {
        let inv = 1.0 / self.lambda;
        let mut rows = vec![0.0; f.len()];
        let mut cols = vec![0.0; g.len()];
        for (i, row) in self.cost.outer_iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let p = (self.log_a[i] + self.log_b[j] + (f[i] + g[j] - c) * inv).exp();
                rows[i] += p;
                cols[j] += p;
            }
        }
        let r: f64 = rows.iter().zip(self.mu).map(|(a, b)| (a - b).abs()).sum();
        let c: f64 = cols.iter().zip(self.nu).map(|(a, b)| (a - b).abs()).sum();
        r.max(c)
    }
}

fn positive_atoms(m: &DiscreteMeasure) -> Vec<usize> {
    (0..m.len()).filter(|&i| m.weights()[i] > 0.0).collect()
}

fn gather_coords(m: &DiscreteMeasure, idx: &[usize]) -> Vec<f64> {
    idx.iter().flat_map(|&i| m.point(i).iter().copied()).collect()
}

/// `-λ log Σ_j ν_j exp((ψ_j - c(x, y_j)) / λ)`: the soft c-transform of `ψ`
/// evaluated at an arbitrary point.
pub fn soft_c_transform(x: &[f64], nu: &DiscreteMeasure, psi: &[f64], lambda: f64, cost: &Cost) -> f64 {
    let args: Vec<f64> = nu
        .points()
        .zip(nu.weights().iter().zip(psi))
        .map(|(y, (&w, &p))| w.ln() + (p - cost.eval(x, y)) / lambda)
        .collect();
    -lambda * log_sum_exp(&args)
}

/// Gradient in `x` of [`soft_c_transform`]: `Σ_j p_j(x) ∇_x c(x, y_j)` with
/// `p(x) ∝ ν_j exp((ψ_j - c(x, y_j)) / λ)`.
pub fn soft_c_transform_grad(x: &[f64], nu: &DiscreteMeasure, psi: &[f64], lambda: f64, cost: &Cost, out: &mut [f64]) {
    let mut p: Vec<f64> = nu
        .points()
        .zip(nu.weights().iter().zip(psi))
        .map(|(y, (&w, &q))| w.ln() + (q - cost.eval(x, y)) / lambda)
        .collect();
    log_sum_exp_softmax(&mut p);
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut g = vec![0.0; x.len()];
    for (y, &pj) in nu.points().zip(&p) {
        if pj == 0.0 {
            continue;
        }
        cost.grad_x(x, y, &mut g);
        for (o, gi) in out.iter_mut().zip(&g) {
            *o += pj * gi;
        }
    }
}

struct ReferenceSolve {
    f: Vec<f64>,
    g: Vec<f64>,
    iterations: usize,
    converged: bool,
    marginal_error: f64,
    mu_idx: Vec<usize>,
    nu_idx: Vec<usize>,
}

/// Solves on the positive atoms of both marginals with reference
/// `exp(log_a) ⊗ exp(log_b)` given on those atoms.
fn solve_reduced(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    lambda: f64,
    cost: &Cost,
    opts: &SinkhornOptions,
    warm_psi: Option<&[f64]>,
    log_ref: impl FnOnce(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>),
) -> Result<ReferenceSolve> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("λ = {lambda} must be positive")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("Sinkhorn tolerance must be positive"));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::UnsupportedDimension { expected: mu.dim(), got: nu.dim() });
    }
    let mu_idx = positive_atoms(mu);
    let nu_idx = positive_atoms(nu);
    let d = mu.dim();
    let cmat = cost.matrix(d, &gather_coords(mu, &mu_idx), &gather_coords(nu, &nu_idx));
    if cmat.iter().any(|c| !c.is_finite()) {
        return Err(Error::numerical("cost matrix has non-finite entries"));
    }
    let mu_w: Vec<f64> = mu_idx.iter().map(|&i| mu.weights()[i]).collect();
    let nu_w: Vec<f64> = nu_idx.iter().map(|&j| nu.weights()[j]).collect();
    let (log_a, log_b) = log_ref(&mu_w, &nu_w);
    let solver = DenseSinkhorn::new(&cmat, &mu_w, &nu_w, log_a, log_b, lambda);
    let warm = warm_psi.filter(|p| p.len() == nu.len()).map(|p| nu_idx.iter().map(|&j| p[j]).collect());
    let res = solver.run(warm, opts)?;
    let marginal_error = solver.marginal_error(&res.f, &res.g);
    Ok(ReferenceSolve {
        f: res.f,
        g: res.g,
        iterations: res.iterations,
        converged: res.converged,
        marginal_error,
        mu_idx,
        nu_idx,
    })
}

/// Solves `T_λ(μ, ν)` from a cold start.
pub fn solve_eot(mu: &DiscreteMeasure, nu: &DiscreteMeasure, lambda: f64, cost: &Cost, opts: &SinkhornOptions) -> Result<EotSolution> {
    solve_eot_warm(mu, nu, lambda, cost, opts, None)
}

/// Solves `T_λ(μ, ν)` starting from the `ψ` of a previous solve on the same
/// `ν` (ignored if its length does not match).
pub fn solve_eot_warm(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    lambda: f64,
    cost: &Cost,
    opts: &SinkhornOptions,
    warm: Option<&PotentialPair>,
) -> Result<EotSolution> {
    let red = solve_reduced(mu, nu, lambda, cost, opts, warm.map(|p| p.psi.as_slice()), |a, b| {
        (a.iter().map(|w| w.ln()).collect(), b.iter().map(|w| w.ln()).collect())
    })?;
    let mean: f64 = red.mu_idx.iter().zip(&red.f).map(|(&i, f)| mu.weights()[i] * f).sum();
    let mut psi = vec![f64::NAN; nu.len()];
    for (&j, g) in red.nu_idx.iter().zip(&red.g) {
        psi[j] = g + mean;
    }
    let mut phi = vec![f64::NAN; mu.len()];
    for (&i, f) in red.mu_idx.iter().zip(&red.f) {
        phi[i] = f - mean;
    }
    // Atoms with zero mass get their values from the Schrödinger equations.
    let nu_pos = nu.support();
    let psi_pos: Vec<f64> = red.nu_idx.iter().map(|&j| psi[j]).collect();
    for i in 0..mu.len() {
        if phi[i].is_nan() {
            phi[i] = soft_c_transform(mu.point(i), &nu_pos, &psi_pos, lambda, cost);
        }
    }
    let mu_pos = mu.support();
    let phi_pos: Vec<f64> = red.mu_idx.iter().map(|&i| phi[i]).collect();
    for j in 0..nu.len() {
        if psi[j].is_nan() {
            psi[j] = soft_c_transform_sym(nu.point(j), &mu_pos, &phi_pos, lambda, cost);
        }
    }
    let value: f64 = mu.weights().iter().zip(&phi).map(|(w, p)| if *w > 0.0 { w * p } else { 0.0 }).sum::<f64>()
        + nu.weights().iter().zip(&psi).map(|(w, p)| if *w > 0.0 { w * p } else { 0.0 }).sum::<f64>();
    if !value.is_finite() {
        return Err(Error::numerical("EOT cost is not finite"));
    }
    Ok(EotSolution {
        potentials: PotentialPair { phi, psi, lambda, normalization: Normalization::MeanZeroPhi },
        cost: value,
        marginal_error: red.marginal_error,
        iterations: red.iterations,
        converged: red.converged,
    })
}

/// Soft c-transform in the second argument: `-λ log Σ_i μ_i exp((φ_i - c(x_i, y)) / λ)`.
fn soft_c_transform_sym(y: &[f64], mu: &DiscreteMeasure, phi: &[f64], lambda: f64, cost: &Cost) -> f64 {
    let args: Vec<f64> = mu
        .points()
        .zip(mu.weights().iter().zip(phi))
        .map(|(x, (&w, &p))| w.ln() + (p - cost.eval(x, y)) / lambda)
        .collect();
    -lambda * log_sum_exp(&args)
}

/// EOT cost with reference `σ_α = μ^α ⊗ ν`, where `μ^α` is the measure with
/// Lebesgue density `(dμ/dx)^α` (so `α = 1` is the standard reference and
/// `α = 0` is Lebesgue on the first factor). `μ` must live on `grid`.
pub fn eot_cost_with_reference(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    lambda: f64,
    alpha: f64,
    grid: &Grid,
    cost: &Cost,
    opts: &SinkhornOptions,
) -> Result<f64> {
    if !grid.aligned_with(mu) {
        return Err(Error::mismatch("reference change needs μ to be a measure on the grid"));
    }
    if !(alpha <= 1.0) {
        return Err(Error::invalid(format!("α = {alpha} must be at most 1")));
    }
    let log_vol = grid.cell_volume().ln();
    let red = solve_reduced(mu, nu, lambda, cost, opts, None, |a, b| {
        (
            a.iter().map(|w| alpha * (w.ln() - log_vol) + log_vol).collect(),
            b.iter().map(|w| w.ln()).collect(),
        )
    })?;
    let value: f64 = red.mu_idx.iter().zip(&red.f).map(|(&i, f)| mu.weights()[i] * f).sum::<f64>()
        + red.nu_idx.iter().zip(&red.g).map(|(&j, g)| nu.weights()[j] * g).sum::<f64>();
    if !value.is_finite() {
        return Err(Error::numerical("EOT cost is not finite"));
    }
    Ok(value)
}

/// `G_λ(μ | σ_α) = Σ_k w_k T_λ(μ, ν_k | μ^α ⊗ ν_k)`.
pub fn barycenter_functional_with_reference(
    mu: &DiscreteMeasure,
    problem: &BarycenterProblem,
    alpha: f64,
    grid: &Grid,
    opts: &SinkhornOptions,
) -> Result<f64> {
    problem
        .marginals
        .iter()
        .zip(&problem.weights)
        .enumerate()
        .map(|(k, (nu, w))| {
            eot_cost_with_reference(mu, nu, problem.lambda, alpha, grid, &problem.cost, opts)
                .map(|c| w * c)
                .map_err(|e| Error::Marginal { index: k, source: Box::new(e) })
        })
        .sum()
}

/// `V[μ] = Σ_k w_k φ_k[μ]` together with the K underlying EOT solutions.
#[derive(Debug, Clone)]
pub struct FirstVariation<'a> {
    problem: &'a BarycenterProblem,
    pub solutions: Vec<EotSolution>,
    /// `V[μ]` at the atoms of `μ`.
    pub values: Vec<f64>,
}

impl FirstVariation<'_> {
    /// `V[μ](x)` at an arbitrary point, extending each `φ_k` by its soft
    /// c-transform.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let p = self.problem;
        p.marginals
            .iter()
            .zip(&p.weights)
            .zip(&self.solutions)
            .map(|((nu, w), s)| w * soft_c_transform(x, nu, &s.potentials.psi, p.lambda, &p.cost))
            .sum()
    }

    /// `∇V[μ](x)`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let p = self.problem;
        let mut out = vec![0.0; x.len()];
        let mut gk = vec![0.0; x.len()];
        for ((nu, w), s) in p.marginals.iter().zip(&p.weights).zip(&self.solutions) {
            soft_c_transform_grad(x, nu, &s.potentials.psi, p.lambda, &p.cost, &mut gk);
            for (o, g) in out.iter_mut().zip(&gk) {
                *o += w * g;
            }
        }
        out
    }

    /// `G_λ(μ) = Σ_k w_k T_λ(μ, ν_k)`.
    pub fn functional_value(&self) -> f64 {
        self.problem.weights.iter().zip(&self.solutions).map(|(w, s)| w * s.cost).sum()
    }

    pub fn all_converged(&self) -> bool {
        self.solutions.iter().all(|s| s.converged)
    }
}

/// Solves the K problems `(μ, ν_k)`; `warm` optionally supplies one previous
/// potential pair per marginal.
pub fn first_variation_warm<'a>(
    mu: &DiscreteMeasure,
    problem: &'a BarycenterProblem,
    opts: &SinkhornOptions,
    warm: Option<&[PotentialPair]>,
) -> Result<FirstVariation<'a>> {
    let solutions = problem
        .marginals
        .par_iter()
        .enumerate()
        .map(|(k, nu)| {
            let w = warm.and_then(|ws| ws.get(k));
            solve_eot_warm(mu, nu, problem.lambda, &problem.cost, opts, w)
                .map_err(|e| Error::Marginal { index: k, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; mu.len()];
    for (s, w) in solutions.iter().zip(&problem.weights) {
        for (v, p) in values.iter_mut().zip(&s.potentials.phi) {
            *v += w * p;
        }
    }
    Ok(FirstVariation { problem, solutions, values })
}

pub fn first_variation<'a>(mu: &DiscreteMeasure, problem: &'a BarycenterProblem, opts: &SinkhornOptions) -> Result<FirstVariation<'a>> {
    first_variation_warm(mu, problem, opts, None)
}

/// `∇V[μ](x)`, the drift used by particle gradient descent.
pub fn grad_first_variation(mu: &DiscreteMeasure, problem: &BarycenterProblem, x: &[f64], opts: &SinkhornOptions) -> Result<Vec<f64>> {
    Ok(first_variation(mu, problem, opts)?.grad(x))
}

/// `G_λ(μ)`.
pub fn barycenter_functional(mu: &DiscreteMeasure, problem: &BarycenterProblem, opts: &SinkhornOptions) -> Result<f64> {
    Ok(first_variation(mu, problem, opts)?.functional_value())
}

/// `S_λ(μ, ν) = T_λ(μ, ν) - ½ T_λ(μ, μ) - ½ T_λ(ν, ν)`.
pub fn sinkhorn_divergence(mu: &DiscreteMeasure, nu: &DiscreteMeasure, lambda: f64, cost: &Cost, opts: &SinkhornOptions) -> Result<f64> {
    let cross = solve_eot(mu, nu, lambda, cost, opts)?.cost;
    let self_mu = solve_eot(mu, mu, lambda, cost, opts)?.cost;
    let self_nu = solve_eot(nu, nu, lambda, cost, opts)?.cost;
    Ok(cross - 0.5 * self_mu - 0.5 * self_nu)
}

/// Writes `atom_index,potential` rows.
pub fn write_potentials(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::from("atom_index,potential\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", crate::measures::io::format_float(*v)));
    }
    fs::write(path, out).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

/// `F_{λ,τ}(μ) = G_λ(μ) + τ H(μ)` for a grid measure.
pub fn primal_value(mu: &DiscreteMeasure, grid: &Grid, problem: &BarycenterProblem, opts: &SinkhornOptions) -> Result<f64> {
    let h = entropy(mu, grid)?;
    Ok(barycenter_functional(mu, problem, opts)? + problem.tau * h)
}
